use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AccuracySample, DimTriple};
use crate::optimize::Budget;
use crate::regress::Dataset;

use super::protocol::{Dimension, Request, Response, Status, ECHO_TOLERANCE, PROTOCOL_VERSION};
use super::schedule::{budget_floors, make_schedule, Schedule};
use super::trainer::Trainer;

fn base_default() -> DimTriple {
    DimTriple::BASE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectConfig {
    pub budget: Budget,
    /// Pruning rounds per dimension.
    pub rounds: usize,
    /// Ratios of the model every round starts from.
    #[serde(default = "base_default")]
    pub base_point: DimTriple,
    /// Measured accuracy of the starting model, as a fraction.
    pub base_accuracy: f64,
}

impl CollectConfig {
    /// Starts from the unpruned model `(1, 1, 1)`.
    pub fn new(budget: Budget, rounds: usize, base_accuracy: f64) -> Self {
        CollectConfig {
            budget,
            rounds,
            base_point: DimTriple::BASE,
            base_accuracy,
        }
    }

    /// One schedule per dimension, each from the base ratio down to its floor.
    pub fn schedules(&self) -> Result<Vec<Schedule>> {
        let (d, w, r) = budget_floors(self.budget, &self.base_point);
        let floors = [d, w, r];
        let start = self.base_point.to_array();
        Dimension::ALL
            .iter()
            .map(|&dim| make_schedule(dim, start[dim.index()], floors[dim.index()], self.rounds))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CollectOutcome {
    /// Base sample first, then every successful round in request order.
    pub dataset: Dataset,
    /// Every exchanged line, requests and responses interleaved, including
    /// replayed ones.
    pub transcript: Vec<String>,
    /// Rounds the trainer reported as failed.
    pub warnings: Vec<String>,
    /// Prune requests sent to the live trainer in this run.
    pub live_requests: usize,
    /// Prune requests answered from the prior transcript.
    pub replayed_requests: usize,
}

impl CollectOutcome {
    pub fn is_partial(&self) -> bool {
        !self.warnings.is_empty()
    }
}

struct Session<'t, 'r, 's> {
    trainer: &'t mut dyn Trainer,
    replay: &'r [String],
    cursor: usize,
    live: bool,
    transcript: Vec<String>,
    sink: Option<&'s mut dyn Write>,
    live_requests: usize,
    replayed_requests: usize,
}

fn is_handshake(line: &str) -> bool {
    matches!(Request::from_line(line), Ok(Request::Handshake { .. }))
}

fn check_handshake(line: &str) -> Result<()> {
    let resp = Response::from_line(line)?;
    if resp.status != Status::Ok || resp.protocol.as_deref() != Some(PROTOCOL_VERSION) {
        return Err(Error::Protocol(format!("handshake rejected: {line}")));
    }
    Ok(())
}

impl Session<'_, '_, '_> {
    fn record(&mut self, line: String) -> Result<()> {
        if let Some(sink) = self.sink.as_deref_mut() {
            writeln!(sink, "{line}")?;
            sink.flush()?;
        }
        self.transcript.push(line);
        Ok(())
    }

    /// Answers `request` from the transcript when it still has a complete
    /// pair, otherwise from the live trainer.
    fn send(&mut self, request: &Request) -> Result<String> {
        let line = request.to_line();
        while self.cursor + 1 < self.replay.len() {
            let recorded = self.replay[self.cursor].clone();
            let answer = self.replay[self.cursor + 1].clone();
            if recorded == line {
                self.cursor += 2;
                self.replayed_requests += 1;
                self.record(recorded)?;
                self.record(answer.clone())?;
                return Ok(answer);
            }
            if !is_handshake(&recorded) {
                return Err(Error::TranscriptMismatch(format!("next request is {line}, transcript has {recorded}")));
            }
            // Each resumed run opened with its own handshake.
            check_handshake(&answer)?;
            self.cursor += 2;
            self.record(recorded)?;
            self.record(answer)?;
        }

        if !self.live {
            let hello = Request::handshake().to_line();
            let answer = self.trainer.exchange(&hello)?;
            self.record(hello)?;
            self.record(answer.clone())?;
            check_handshake(&answer)?;
            self.live = true;
        }
        let answer = self.trainer.exchange(&line)?;
        self.live_requests += 1;
        self.record(line)?;
        self.record(answer.clone())?;
        Ok(answer)
    }

    fn leftover(&self) -> Option<&str> {
        self.replay[self.cursor.min(self.replay.len())..]
            .chunks(2)
            .find(|pair| pair.len() == 2 && !is_handshake(&pair[0]))
            .map(|pair| pair[0].as_str())
    }
}

enum Round {
    Measured(AccuracySample),
    Failed(String),
}

fn interpret(answer: &str, dimension: Dimension, target: f64) -> Result<Round> {
    let resp = Response::from_line(answer)?;
    if resp.status == Status::Error {
        return Ok(Round::Failed(resp.message.unwrap_or_else(|| "no message".into())));
    }
    let (Some(d), Some(w), Some(r), Some(accuracy)) = (resp.d, resp.w, resp.r, resp.accuracy) else {
        return Err(Error::Protocol(format!("response lacks d, w, r or accuracy: {answer}")));
    };
    let point = DimTriple::new(d, w, r).map_err(|e| Error::Protocol(format!("{e} in {answer}")))?;
    let reached = point.to_array()[dimension.index()];
    if (reached - target).abs() > ECHO_TOLERANCE {
        return Err(Error::Protocol(format!(
            "{} target {target} came back as {reached}",
            dimension.name()
        )));
    }
    let sample = AccuracySample::new(point, accuracy).map_err(|e| Error::Protocol(format!("{e} in {answer}")))?;
    Ok(Round::Measured(sample))
}

/// Runs every schedule against `trainer`, depth first, then width, then
/// resolution. Each round prunes the base model in one dimension.
///
/// `replay` holds the lines of an earlier transcript of the same
/// configuration; requests it already answers are not sent again, and the
/// trainer is never touched if it answers all of them. Lines are written to
/// `sink` as they are exchanged. A round the trainer reports as failed ends
/// that dimension and adds a warning.
pub fn collect(
    trainer: &mut dyn Trainer,
    config: &CollectConfig,
    replay: &[String],
    sink: Option<&mut dyn Write>,
) -> Result<CollectOutcome> {
    let schedules = config.schedules()?;
    let base = AccuracySample::new(config.base_point, config.base_accuracy)?;
    let mut session = Session {
        trainer,
        replay,
        cursor: 0,
        live: false,
        transcript: Vec::new(),
        sink,
        live_requests: 0,
        replayed_requests: 0,
    };
    let mut samples = vec![base];
    let mut warnings = Vec::new();

    for schedule in &schedules {
        for (n, &target) in schedule.targets.iter().enumerate() {
            let request = Request::PruneFinetune {
                dimension: schedule.dimension,
                target,
                round: n + 1,
            };
            let answer = session.send(&request)?;
            match interpret(&answer, schedule.dimension, target)? {
                Round::Measured(sample) => samples.push(sample),
                Round::Failed(message) => {
                    warnings.push(format!(
                        "{} round {} (target {target}) failed: {message}; skipped {} remaining round(s)",
                        schedule.dimension.name(),
                        n + 1,
                        schedule.targets.len() - n - 1
                    ));
                    break;
                }
            }
        }
    }

    if let Some(extra) = session.leftover() {
        return Err(Error::TranscriptMismatch(format!("transcript continues past this run with {extra}")));
    }
    if session.live {
        session.trainer.finish()?;
    }
    Ok(CollectOutcome {
        dataset: Dataset::new(samples)?,
        transcript: session.transcript,
        warnings,
        live_requests: session.live_requests,
        replayed_requests: session.replayed_requests,
    })
}
