use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{DimTriple, Predictor};

use super::protocol::{Request, Response};

/// One side of a line-oriented request/response conversation.
///
/// Lines carry no trailing newline. Implementations must not be invoked
/// until the first exchange so that a fully replayed run never starts one.
pub trait Trainer {
    fn exchange(&mut self, request: &str) -> Result<String>;

    /// Ends the conversation. Called once, after the last live exchange.
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Stand-in for a real fine-tuning job: reports a known accuracy surface at
/// the requested point with optional Gaussian noise and ratio jitter.
///
/// Every request prunes the base model (by default `(1, 1, 1)`), so a
/// response depends only on the request and the random stream.
#[derive(Debug, Clone)]
pub struct SimulatedTrainer<P> {
    surface: P,
    base: DimTriple,
    noise: Option<Normal<f64>>,
    echo_jitter: f64,
    rng: ChaCha8Rng,
    prune_calls: usize,
}

impl<P: Predictor> SimulatedTrainer<P> {
    pub fn new(surface: P, noise_sd: f64, echo_jitter: f64, seed: u64) -> Result<Self> {
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(Error::InvalidConfig(format!("noise sd {noise_sd} must be finite and >= 0")));
        }
        if !(echo_jitter.is_finite() && echo_jitter >= 0.0) {
            return Err(Error::InvalidConfig(format!("echo jitter {echo_jitter} must be finite and >= 0")));
        }
        let noise = (noise_sd > 0.0).then(|| Normal::new(0.0, noise_sd).expect("sd checked above"));
        Ok(SimulatedTrainer {
            surface,
            base: DimTriple::BASE,
            noise,
            echo_jitter,
            rng: ChaCha8Rng::seed_from_u64(seed),
            prune_calls: 0,
        })
    }

    pub fn with_base(mut self, base: DimTriple) -> Self {
        self.base = base;
        self
    }

    /// Number of prune-and-finetune requests served so far.
    pub fn prune_calls(&self) -> usize {
        self.prune_calls
    }

    pub fn respond(&mut self, request: &Request) -> Response {
        match request {
            Request::Handshake { .. } => Response::handshake_ok(),
            Request::Shutdown => Response::ok(),
            Request::PruneFinetune { dimension, target, .. } => {
                self.prune_calls += 1;
                if !(target.is_finite() && *target > 0.0 && *target <= 1.0) {
                    return Response::error(format!("target {target} is outside (0, 1]"));
                }
                let mut point = self.base.to_array();
                let mut reached = *target;
                if self.echo_jitter > 0.0 {
                    reached += self.rng.random_range(-self.echo_jitter..=self.echo_jitter);
                }
                point[dimension.index()] = reached.clamp(f64::MIN_POSITIVE, 1.0);
                let mut acc = self.surface.value(point[0], point[1], point[2]);
                if let Some(noise) = &self.noise {
                    acc += noise.sample(&mut self.rng);
                }
                Response::measured(point, acc.clamp(0.0, 1.0))
            }
        }
    }
}

impl<P: Predictor> Trainer for SimulatedTrainer<P> {
    fn exchange(&mut self, request: &str) -> Result<String> {
        let response = match Request::from_line(request) {
            Ok(req) => self.respond(&req),
            Err(e) => Response::error(format!("unreadable request: {e}")),
        };
        Ok(response.to_line())
    }
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Trainer behind a shell command speaking newline-delimited JSON on
/// stdin/stdout. The process starts on the first exchange.
pub struct ProcessTrainer {
    command: String,
    running: Option<Running>,
}

impl ProcessTrainer {
    pub fn new(command: impl Into<String>) -> Self {
        ProcessTrainer {
            command: command.into(),
            running: None,
        }
    }

    pub fn is_started(&self) -> bool {
        self.running.is_some()
    }

    fn start(&mut self) -> Result<&mut Running> {
        if self.running.is_none() {
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(&self.command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()?;
            let stdin = child.stdin.take().expect("stdin is piped");
            let stdout = BufReader::new(child.stdout.take().expect("stdout is piped"));
            self.running = Some(Running { child, stdin, stdout });
        }
        Ok(self.running.as_mut().expect("started above"))
    }
}

impl Trainer for ProcessTrainer {
    fn exchange(&mut self, request: &str) -> Result<String> {
        let running = self.start()?;
        let sent = writeln!(running.stdin, "{request}").and_then(|_| running.stdin.flush());
        if let Err(e) = sent {
            return Err(Error::Protocol(format!("trainer closed its input: {e}")));
        }
        let mut line = String::new();
        if running.stdout.read_line(&mut line)? == 0 {
            return Err(Error::Protocol("trainer exited without responding".into()));
        }
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(mut running) = self.running.take() {
            // A trainer that already exited cannot take the shutdown line.
            let _ = writeln!(running.stdin, "{}", Request::Shutdown.to_line());
            let _ = running.stdin.flush();
            drop(running.stdin);
            running.child.wait()?;
        }
        Ok(())
    }
}

impl Drop for ProcessTrainer {
    fn drop(&mut self) {
        if let Some(running) = self.running.as_mut() {
            let _ = running.child.kill();
            let _ = running.child.wait();
        }
    }
}
