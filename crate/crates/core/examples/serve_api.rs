//! Starts the HTTP service on an ephemeral port, queries it over a plain TCP
//! connection and shuts down.

use std::sync::Arc;

use stagecraft::api::{router, ApiConfig, AppState};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};

async fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> String {
    let mut conn = TcpStream::connect(addr).await.expect("connect");
    let req = format!(
        "{method} {path} HTTP/1.1\r\nhost: localhost\r\ncontent-type: application/json\r\n\
         content-length: {}\r\nconnection: close\r\n\r\n{body}",
        body.len()
    );
    conn.write_all(req.as_bytes()).await.expect("write");
    let mut out = String::new();
    conn.read_to_string(&mut out).await.expect("read");
    out
}

#[tokio::main]
async fn main() {
    let state = Arc::new(AppState::load(ApiConfig::default().with_env()).expect("bundled protocols"));
    let listener = TcpListener::bind("127.0.0.1:0").await.expect("bind");
    let addr = listener.local_addr().expect("local address");
    tokio::spawn(async move { axum::serve(listener, router(state)).await });
    println!("listening on {addr}");

    for (method, path, body) in [
        ("GET", "/api/protocols", ""),
        ("GET", "/api/protocols/majority-voting/stages/S4?config=%7B%22N%22%3A1%2C%22n%22%3A4%2C%22y%22%3A2%7D", ""),
        ("POST", "/api/sessions", r#"{"protocol":"majority-voting","config":{"Y":1,"N":1},"seed":1}"#),
        ("POST", "/api/sessions/s1/step", r#"{"mode":"progress","expected_run_length":1}"#),
        // repeating the request with the old run length is rejected
        ("POST", "/api/sessions/s1/step", r#"{"mode":"progress","expected_run_length":1}"#),
    ] {
        let resp = request(addr, method, path, body).await;
        let (head, json) = resp.split_once("\r\n\r\n").unwrap_or((&resp, ""));
        println!("{method} {path}\n  {}", head.lines().next().unwrap_or(""));
        let shown: String = json.chars().take(300).collect();
        println!("  {shown}{}", if json.len() > 300 { " ..." } else { "" });
    }
}
