use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::Args;
use prune_planner::collect::{Request, Response, SimulatedTrainer};

use crate::commands::read_map;
use crate::{CliError, Global};

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Map file used as the true accuracy surface.
    #[arg(long)]
    surface: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
    /// Answer the n-th prune request (1-based) with an error.
    #[arg(long)]
    fail_at: Option<usize>,
    /// Answer the n-th prune request (1-based) with a malformed line.
    #[arg(long)]
    garble_at: Option<usize>,
}

pub fn run(global: &Global, args: &ServeArgs) -> Result<(), CliError> {
    let (map, _) = read_map(&args.surface)?;
    let mut trainer = SimulatedTrainer::new(map, args.noise, args.jitter, global.seed)?;
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    let mut prunes = 0;
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| CliError::Core(e.into()))?;
        let reply = match Request::from_line(&line) {
            Ok(Request::Shutdown) => break,
            Ok(req @ Request::PruneFinetune { .. }) => {
                prunes += 1;
                if args.garble_at == Some(prunes) {
                    "{\"status\":".to_string()
                } else if args.fail_at == Some(prunes) {
                    Response::error("simulated fine-tuning failure").to_line()
                } else {
                    trainer.respond(&req).to_line()
                }
            }
            Ok(req) => trainer.respond(&req).to_line(),
            Err(e) => Response::error(format!("unreadable request: {e}")).to_line(),
        };
        writeln!(stdout, "{reply}").and_then(|_| stdout.flush()).map_err(|e| CliError::Core(e.into()))?;
    }
    Ok(())
}
