//! Rz synthesis providers.
//!
//! Scheduling only consumes the (T, S, H) counts of a decomposition, so the
//! number-theoretic synthesis itself is pluggable: a table of pre-synthesized
//! sequences loaded from disk, or a parametric count model.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::parse_angle;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SynthGate {
    H,
    S,
    T,
}

impl fmt::Display for SynthGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthGate::H => "H",
            SynthGate::S => "S",
            SynthGate::T => "T",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RzDecomposition {
    pub sequence: Vec<SynthGate>,
    pub n_t: usize,
    pub n_s: usize,
    pub n_h: usize,
    pub precision_exponent: u32,
}

impl RzDecomposition {
    pub fn from_sequence(sequence: Vec<SynthGate>, precision_exponent: u32) -> Self {
        let count = |k| sequence.iter().filter(|&&g| g == k).count();
        RzDecomposition {
            n_t: count(SynthGate::T),
            n_s: count(SynthGate::S),
            n_h: count(SynthGate::H),
            sequence,
            precision_exponent,
        }
    }
}

/// Pre-synthesized sequences keyed by (angle, epsilon).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynthTable {
    entries: Vec<(f64, u32, Vec<SynthGate>)>,
}

impl SynthTable {
    /// One entry per line: `angle epsilon SEQUENCE`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected `angle epsilon SEQUENCE`, got `{line}`")));
            }
            let angle = parse_angle(fields[0]).ok_or_else(|| err(format!("bad angle `{}`", fields[0])))?;
            let eps: u32 = fields[1]
                .parse()
                .map_err(|_| err(format!("bad epsilon `{}`", fields[1])))?;
            let seq = fields[2]
                .chars()
                .map(|c| match c {
                    'H' => Ok(SynthGate::H),
                    'S' => Ok(SynthGate::S),
                    'T' => Ok(SynthGate::T),
                    other => Err(err(format!("unexpected gate `{other}` in sequence"))),
                })
                .collect::<Result<Vec<_>>>()?;
            entries.push((angle, eps, seq));
        }
        Ok(SynthTable { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn lookup(&self, angle: f64, epsilon: u32) -> Option<&[SynthGate]> {
        self.entries
            .iter()
            .find(|(a, e, _)| *e == epsilon && (a - angle).abs() < 1e-9)
            .map(|(_, _, s)| s.as_slice())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub enum RzProvider {
    /// Deterministic stand-in: n_t = round(3·ε·log2 10) + 4, n_s = n_h = n_t + 1.
    #[default]
    Model,
    File(SynthTable),
}

fn same_angle_mod_2pi(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-12 || 2.0 * PI - d < 1e-12
}

pub fn model_t_count(epsilon: u32) -> usize {
    (3.0 * epsilon as f64 * 10f64.log2()).round() as usize + 4
}

pub fn synthesize_rz(angle: f64, epsilon: u32, provider: &RzProvider) -> Result<RzDecomposition> {
    if epsilon < 1 {
        return Err(Error::Config(format!("precision exponent must be >= 1, got {epsilon}")));
    }
    if same_angle_mod_2pi(angle, 0.0) {
        return Ok(RzDecomposition::from_sequence(Vec::new(), epsilon));
    }
    if same_angle_mod_2pi(angle, PI / 4.0) {
        return Ok(RzDecomposition::from_sequence(vec![SynthGate::T], epsilon));
    }
    match provider {
        RzProvider::File(table) => table
            .lookup(angle, epsilon)
            .map(|s| RzDecomposition::from_sequence(s.to_vec(), epsilon))
            .ok_or(Error::SynthesisLookup { angle, epsilon }),
        RzProvider::Model => {
            let n_t = model_t_count(epsilon);
            let mut seq = Vec::with_capacity(3 * n_t + 2);
            seq.extend([SynthGate::H, SynthGate::S]);
            for _ in 0..n_t {
                seq.extend([SynthGate::T, SynthGate::H, SynthGate::S]);
            }
            Ok(RzDecomposition::from_sequence(seq, epsilon))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_count_at_eps6() {
        let d = synthesize_rz(PI / 8.0, 6, &RzProvider::Model).unwrap();
        assert_eq!(d.n_t, 64);
        assert_eq!((d.n_s, d.n_h), (65, 65));
        assert_eq!(d.sequence.len(), 64 + 65 + 65);
    }

    #[test]
    fn model_is_monotone_in_precision() {
        let mut prev = 0;
        for eps in 1..=20 {
            let n = synthesize_rz(0.3, eps, &RzProvider::Model).unwrap().n_t;
            assert!(n > prev);
            prev = n;
        }
    }

    #[test]
    fn t_angle_is_special_cased() {
        for provider in [RzProvider::Model, RzProvider::File(SynthTable::default())] {
            let d = synthesize_rz(PI / 4.0, 9, &provider).unwrap();
            assert_eq!(d.sequence, vec![SynthGate::T]);
            assert_eq!(d.n_t, 1);
        }
        let d = synthesize_rz(0.0, 3, &RzProvider::Model).unwrap();
        assert!(d.sequence.is_empty());
    }

    #[test]
    fn file_provider_lookup() {
        let table = SynthTable::parse("# comment\n0.3 4 HSTHT\npi/8 6 THT  # trailing\n").unwrap();
        let p = RzProvider::File(table);
        let d = synthesize_rz(PI / 8.0, 6, &p).unwrap();
        assert_eq!((d.n_t, d.n_s, d.n_h), (2, 0, 1));
        assert!(matches!(
            synthesize_rz(PI / 8.0, 7, &p),
            Err(Error::SynthesisLookup { epsilon: 7, .. })
        ));
        assert!(SynthTable::parse("0.3 4 HXT").is_err());
        assert!(synthesize_rz(0.3, 0, &RzProvider::Model).is_err());
    }
}
