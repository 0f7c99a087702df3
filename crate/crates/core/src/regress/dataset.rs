use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AccuracySample, DimTriple};

/// How the accuracy column of a CSV file is scaled.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Percent if any accuracy exceeds 1, fraction otherwise.
    #[default]
    Auto,
    Percent,
    Fraction,
}

pub const CSV_HEADER: [&str; 4] = ["d", "w", "r", "accuracy"];

/// Ordered, non-empty collection of accuracy samples. Repeated points are
/// allowed and treated as independent measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<AccuracySample>,
}

impl Dataset {
    pub fn new(samples: Vec<AccuracySample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset { samples })
    }

    pub fn samples(&self) -> &[AccuracySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &AccuracySample> {
        self.samples.iter()
    }

    /// Reads `d,w,r,accuracy` rows.
    ///
    /// With [`Unit::Auto`] a file whose accuracies exceed 1 anywhere is read
    /// as percent; a percent file that also holds values `<= 1` mixes scales
    /// and is rejected.
    pub fn read_csv<R: Read>(reader: R, unit: Unit) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `d,w,r,accuracy`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.len() != 4 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let mut vals = [0.0; 4];
            for (slot, field) in vals.iter_mut().zip(record.iter()) {
                *slot = field.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("{field:?}: {e}"),
                })?;
                if !slot.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value {field:?}"),
                    });
                }
            }
            rows.push((line, vals));
        }

        let any_above_one = rows.iter().any(|(_, v)| v[3] > 1.0);
        let percent = match unit {
            Unit::Percent => true,
            Unit::Fraction => false,
            Unit::Auto => any_above_one,
        };
        if unit == Unit::Auto && percent {
            if let Some((line, v)) = rows.iter().find(|(_, v)| v[3] <= 1.0) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("accuracy {} mixes fraction and percent scales in one file", v[3]),
                });
            }
        }

        let samples = rows
            .into_iter()
            .map(|(line, [d, w, r, a])| {
                let accuracy = if percent { a / 100.0 } else { a };
                let point = DimTriple::new(d, w, r).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
                AccuracySample::new(point, accuracy).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples)
    }

    /// Writes the header and one fractional-accuracy row per sample.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(CSV_HEADER)?;
        for s in &self.samples {
            let p = s.point;
            wtr.write_record([
                p.d().to_string(),
                p.w().to_string(),
                p.r().to_string(),
                s.accuracy.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Seeded shuffle followed by a prefix split into `(train, eval)`.
    ///
    /// Samples at the base point `(1, 1, 1)` always land in the training
    /// split: the unpruned accuracy is known before any pruning happens.
    pub fn split(&self, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
        let len = self.samples.len();
        if n_train == 0 || n_train >= len {
            return Err(Error::SplitOutOfRange { n_train, len });
        }
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        // Stable partition keeps the shuffled order inside each group.
        let (base, rest): (Vec<usize>, Vec<usize>) =
            order.into_iter().partition(|&i| self.samples[i].point.is_base());
        let order: Vec<usize> = base.into_iter().chain(rest).collect();
        let pick = |idx: &[usize]| idx.iter().map(|&i| self.samples[i]).collect::<Vec<_>>();
        Ok((
            Dataset { samples: pick(&order[..n_train]) },
            Dataset { samples: pick(&order[n_train..]) },
        ))
    }

    /// Drops rows that repeat an earlier row exactly (point and accuracy).
    pub fn dedup_exact(&self) -> Dataset {
        let mut seen: Vec<AccuracySample> = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            if !seen.contains(s) {
                seen.push(*s);
            }
        }
        Dataset { samples: seen }
    }

    pub fn concat(&self, other: &Dataset) -> Dataset {
        Dataset {
            samples: [self.samples.as_slice(), other.samples.as_slice()].concat(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: f64, w: f64, r: f64, a: f64) -> AccuracySample {
        AccuracySample::new(DimTriple::new(d, w, r).unwrap(), a).unwrap()
    }

    fn ninety_three() -> Dataset {
        let mut samples = vec![sample(1.0, 1.0, 1.0, 0.93)];
        for i in 1..93 {
            let x = 1.0 - i as f64 / 200.0;
            samples.push(sample(x, 1.0, 1.0, 0.9));
        }
        Dataset::new(samples).unwrap()
    }

    #[test]
    fn empty_is_rejected() {
        assert!(matches!(Dataset::new(vec![]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn csv_percent_detection() {
        let text = "d,w,r,accuracy\n1.0,1.0,1.0,93.63\n0.55,1.0,1.0,92.84\n";
        let ds = Dataset::read_csv(text.as_bytes(), Unit::Auto).unwrap();
        assert_eq!(ds.len(), 2);
        assert!((ds.samples()[0].accuracy - 0.9363).abs() < 1e-15);

        let frac = "d,w,r,accuracy\n1.0,1.0,1.0,0.9363\n";
        let ds = Dataset::read_csv(frac.as_bytes(), Unit::Auto).unwrap();
        assert_eq!(ds.samples()[0].accuracy, 0.9363);

        let ds = Dataset::read_csv(frac.as_bytes(), Unit::Percent).unwrap();
        assert!((ds.samples()[0].accuracy - 0.009363).abs() < 1e-15);
    }

    #[test]
    fn csv_mixed_scales_rejected() {
        let text = "d,w,r,accuracy\n1.0,1.0,1.0,93.63\n0.55,1.0,1.0,0.9284\n";
        let err = Dataset::read_csv(text.as_bytes(), Unit::Auto).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        // An explicit fraction unit cannot hold percent values.
        assert!(Dataset::read_csv(text.as_bytes(), Unit::Fraction).is_err());
    }

    #[test]
    fn csv_rejects_bad_rows() {
        for text in [
            "d,w,accuracy\n1,1,0.9\n",
            "d,w,r,accuracy\n1.0,1.0,abc,0.9\n",
            "d,w,r,accuracy\n1.0,1.0,NaN,0.9\n",
            "d,w,r,accuracy\n1.5,1.0,1.0,0.9\n",
            "d,w,r,accuracy\n",
        ] {
            assert!(Dataset::read_csv(text.as_bytes(), Unit::Auto).is_err(), "{text}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let ds = ninety_three();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice(), Unit::Fraction).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = ninety_three();
        let (train, eval) = ds.split(13, 7).unwrap();
        assert_eq!((train.len(), eval.len()), (13, 80));
        assert!(train.samples().iter().any(|s| s.point.is_base()));
        assert_eq!(ds.split(13, 7).unwrap(), (train, eval));
        let (_, eval) = ds.split(92, 1).unwrap();
        assert_eq!(eval.len(), 1);
        assert!(ds.split(0, 1).is_err());
        assert!(ds.split(93, 1).is_err());
    }

    #[test]
    fn base_point_always_trains() {
        let ds = ninety_three();
        for seed in 0..50 {
            let (train, eval) = ds.split(1, seed).unwrap();
            assert!(train.samples()[0].point.is_base());
            assert!(eval.iter().all(|s| !s.point.is_base()));
        }
    }

    #[test]
    fn dedup_keeps_conflicting_measurements() {
        let ds = Dataset::new(vec![
            sample(1.0, 1.0, 1.0, 0.9363),
            sample(1.0, 1.0, 1.0, 0.9364),
            sample(1.0, 1.0, 1.0, 0.9363),
        ])
        .unwrap();
        assert_eq!(ds.dedup_exact().len(), 2);
    }
}
