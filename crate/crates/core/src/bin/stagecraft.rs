//! Command-line front end: synthesis, speed estimates, bounded checks and the
//! HTTP service.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stagecraft::api::{serve, ApiConfig};
use stagecraft::io::{load_examples, parse_protocol, parse_stage_graph, serialize_stage_graph, slug, to_canonical_string};
use stagecraft::oracle::{verify_bounded, ExploreOptions, Verdict};
use stagecraft::report::verification_to_doc;
use stagecraft::speed::{estimate, EstimateOptions, DEFAULT_INTERACTION_CAP};
use stagecraft::synthesis::{synthesize, Outcome, SynthesisOptions};
use stagecraft::Protocol;

#[derive(Parser)]
#[command(name = "stagecraft", version, about = "Stage-graph verification of population protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Builds and checks both stage graphs of a protocol.
    Synthesize {
        /// Protocol file, or the id of a bundled protocol.
        protocol: String,
        /// Population bound for exhaustive certificate checks.
        #[arg(long = "n-cert", default_value_t = stagecraft::stage::DEFAULT_CERT_BOUND)]
        n_cert: u64,
        /// Directory for the stage-graph and report files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimates phase lengths of the non-terminal stages of a stage graph.
    Speed {
        protocol: String,
        stage_graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 8, 16])]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Only this stage.
        #[arg(long)]
        stage: Option<String>,
        #[arg(long, default_value_t = DEFAULT_INTERACTION_CAP)]
        cap: u64,
    },
    /// Exhaustively checks all initial configurations up to a size.
    Verify {
        protocol: String,
        #[arg(long = "max-size", default_value_t = stagecraft::oracle::DEFAULT_ORACLE_MAX_SIZE)]
        max_size: u64,
    },
    /// Runs the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        protocols: Option<PathBuf>,
    },
}

fn load_protocol(arg: &str) -> Result<Protocol, String> {
    let path = Path::new(arg);
    if path.exists() {
        let bytes = std::fs::read(path).map_err(|e| format!("{arg}: {e}"))?;
        return parse_protocol(&bytes).map_err(|e| format!("{arg}: {e}"));
    }
    load_examples()
        .into_iter()
        .find(|p| slug(&p.name) == arg || p.name == arg)
        .ok_or_else(|| format!("{arg}: no such file or bundled protocol"))
}

fn explore_options() -> ExploreOptions {
    ExploreOptions {
        node_budget: ApiConfig::default().with_env().node_budget,
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Synthesize { protocol, n_cert, out } => {
            let p = load_protocol(&protocol)?;
            let opts = SynthesisOptions {
                cert_bound: n_cert,
                explore: explore_options(),
                ..SynthesisOptions::default()
            };
            let r = synthesize(&p, opts).map_err(|e| e.to_string())?;
            for g in &r.graphs {
                println!("output {}:", g.graph.output as u8);
                for s in &g.graph.stages {
                    let cert = s.certificate.as_ref().map(|f| f.display(&p)).unwrap_or_else(|| "-".into());
                    let speed = s.speed.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
                    println!("  {:<4} {}", s.id, s.constraint.display(&p));
                    println!("       certificate {cert}; speed {speed}");
                }
                if let Some(f) = &g.failure {
                    println!("  incomplete: {f}");
                }
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                let base = slug(&p.name);
                let write = |name: String, text: String| {
                    let path = dir.join(name);
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
                };
                for g in &r.graphs {
                    write(
                        format!("{base}.stage-graph-{}.json", g.graph.output as u8),
                        serialize_stage_graph(&p, &g.graph),
                    )?;
                }
                write(
                    format!("{base}.report.json"),
                    to_canonical_string(&verification_to_doc(&p, &r)),
                )?;
            }
            Ok(match &r.outcome {
                Outcome::Verified => {
                    println!("verified");
                    ExitCode::SUCCESS
                }
                Outcome::Refuted(cex) => {
                    let run: Vec<String> = cex.run.configurations.iter().map(|c| c.display(&p).to_string()).collect();
                    println!("refuted: {}", run.join(" -> "));
                    ExitCode::from(1)
                }
                Outcome::Inconclusive(why) => {
                    println!("inconclusive: {why}");
                    ExitCode::from(2)
                }
            })
        }
        Command::Speed {
            protocol,
            stage_graph,
            sizes,
            trials,
            seed,
            stage,
            cap,
        } => {
            let p = load_protocol(&protocol)?;
            let bytes = std::fs::read(&stage_graph).map_err(|e| format!("{}: {e}", stage_graph.display()))?;
            let g = parse_stage_graph(&p, &bytes).map_err(|e| format!("{}: {e}", stage_graph.display()))?;
            let opts = EstimateOptions {
                trials,
                seed,
                interaction_cap: cap,
            };
            let picked: Vec<usize> = match &stage {
                Some(id) => vec![g.find(id).ok_or_else(|| format!("no stage `{id}`"))?],
                None => (0..g.stages.len()).filter(|&i| !g.is_terminal(i)).collect(),
            };
            let mut out = std::io::stdout().lock();
            for (k, i) in picked.into_iter().enumerate() {
                let children: Vec<_> = g.children(i).into_iter().map(|c| &g.stages[c]).collect();
                let est = estimate(&p, &g.stages[i], &children, &sizes, opts).map_err(|e| e.to_string())?;
                est.write_csv(&mut out, k == 0).map_err(|e| e.to_string())?;
                if let Some(slope) = est.slope {
                    eprintln!(
                        "{}: log-log slope {slope:.2}{}",
                        est.stage,
                        if est.monotone { "" } else { " (means not monotone in n)" }
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { protocol, max_size } => {
            let p = load_protocol(&protocol)?;
            match verify_bounded(&p, max_size, explore_options()).map_err(|e| e.to_string())? {
                Verdict::CorrectUpTo(n) => {
                    println!("correct up to {n} agents");
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Counterexample(cex) => {
                    let run: Vec<String> = cex.run.configurations.iter().map(|c| c.display(&p).to_string()).collect();
                    println!("counterexample: {}", run.join(" -> "));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Serve { port, protocols } => {
            let config = ApiConfig {
                protocol_dir: protocols,
                ..ApiConfig::default()
            }
            .with_env();
            let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            rt.block_on(serve(SocketAddr::from(([0, 0, 0, 0], port)), config))
                .map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
