// SPDX-License-Identifier: Apache-2.0

//! Differential checking of a repaired program against its reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lang::{interpret, Ast, Literal, Status};
use crate::Rational;

/// Values for one input position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InputRange {
    Int { lo: i64, hi: i64 },
    Real { lo: f64, hi: f64, step: f64 },
}

impl InputRange {
    fn width(&self) -> u64 {
        match *self {
            InputRange::Int { lo, hi } => (hi - lo + 1).max(0) as u64,
            InputRange::Real { lo, hi, step } if step > 0.0 => ((hi - lo) / step).floor().max(-1.0) as u64 + 1,
            InputRange::Real { .. } => 0,
        }
    }

    fn nth(&self, i: u64) -> Literal {
        match *self {
            InputRange::Int { lo, .. } => Literal::Int(lo + i as i64),
            InputRange::Real { lo, step, .. } => Literal::Real(lo + step * i as f64),
        }
    }
}

/// Inputs to compare the programs on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// The cartesian product of per-position ranges.
    Ranges { inputs: Vec<InputRange> },
    /// Explicit input sequences.
    Enumerated { inputs: Vec<Vec<Literal>> },
}

/// Products up to this size are enumerated; larger ones are sampled.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;
pub const MAX_EXHAUSTIVE_WIDTH: u64 = 512;
pub const SAMPLES: usize = 10_000;
/// Interpreter step budget for the reference.
pub const FUEL: u64 = 200_000;

impl Domain {
    /// The concrete inputs: all of them when small, else a fixed-seed sample.
    pub fn inputs(&self) -> Vec<Vec<Literal>> {
        match self {
            Domain::Enumerated { inputs } => inputs.clone(),
            Domain::Ranges { inputs } => {
                let widths: Vec<u64> = inputs.iter().map(InputRange::width).collect();
                if widths.contains(&0) {
                    return Vec::new();
                }
                let product = widths.iter().try_fold(1u64, |a, w| a.checked_mul(*w));
                let small = widths.iter().all(|w| *w <= MAX_EXHAUSTIVE_WIDTH);
                match product {
                    Some(p) if small && p <= EXHAUSTIVE_LIMIT => (0..p)
                        .map(|mut k| {
                            let mut v = Vec::with_capacity(inputs.len());
                            for (r, w) in inputs.iter().zip(&widths).rev() {
                                v.push(r.nth(k % w));
                                k /= w;
                            }
                            v.reverse();
                            v
                        })
                        .collect(),
                    _ => {
                        let mut rng = ChaCha8Rng::seed_from_u64(0);
                        (0..SAMPLES)
                            .map(|_| inputs.iter().zip(&widths).map(|(r, w)| r.nth(rng.gen_range(0..*w))).collect())
                            .collect()
                    }
                }
            }
        }
    }

    pub fn is_exhaustive(&self) -> bool {
        match self {
            Domain::Enumerated { .. } => true,
            Domain::Ranges { inputs } => {
                let widths: Vec<u64> = inputs.iter().map(InputRange::width).collect();
                widths.iter().all(|w| *w <= MAX_EXHAUSTIVE_WIDTH)
                    && widths.iter().try_fold(1u64, |a, w| a.checked_mul(*w)).is_some_and(|p| p <= EXHAUSTIVE_LIMIT)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    pub input: Vec<Literal>,
    pub expected: String,
    pub actual: String,
}

/// Evidence from a differential run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Soundness {
    pub passed: bool,
    pub exhaustive: bool,
    /// Inputs on which the reference finished and the programs were compared.
    pub compared: usize,
    /// Inputs skipped because the reference did not finish normally.
    pub skipped: usize,
    pub divergence: Option<Divergence>,
}

fn show(o: &crate::ExactOutcome) -> String {
    let out: Vec<String> = o.trace.output.iter().map(|v| format!("{v:?}")).collect();
    format!("{:?} ret={:?} out=[{}]", o.status, o.ret, out.join(", "))
}

/// Runs both programs with exact arithmetic on every input of `domain` and
/// compares return value and output wherever the reference finishes.
pub fn soundness_check(reference: &Ast, candidate: &Ast, domain: &Domain) -> Soundness {
    let mut ev = Soundness { passed: true, exhaustive: domain.is_exhaustive(), compared: 0, skipped: 0, divergence: None };
    for input in domain.inputs() {
        let want = interpret::<Rational>(reference, &input, FUEL);
        if want.status != Status::Finished {
            ev.skipped += 1;
            continue;
        }
        let got = interpret::<Rational>(candidate, &input, FUEL * 10);
        ev.compared += 1;
        if !want.agrees_with(&got) {
            ev.passed = false;
            ev.divergence = Some(Divergence { input, expected: show(&want), actual: show(&got) });
            break;
        }
    }
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_products_are_exhaustive() {
        let d = Domain::Ranges { inputs: vec![InputRange::Int { lo: 0, hi: 2 }, InputRange::Int { lo: 5, hi: 6 }] };
        let all = d.inputs();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![Literal::Int(0), Literal::Int(5)]);
        assert_eq!(all[5], vec![Literal::Int(2), Literal::Int(6)]);
        assert!(d.is_exhaustive());
    }

    #[test]
    fn wide_ranges_are_sampled_deterministically() {
        let d = Domain::Ranges { inputs: vec![InputRange::Int { lo: 0, hi: 10_000 }] };
        assert!(!d.is_exhaustive());
        assert_eq!(d.inputs().len(), SAMPLES);
        assert_eq!(d.inputs(), d.inputs());
    }

    #[test]
    fn real_steps() {
        let d = Domain::Ranges { inputs: vec![InputRange::Real { lo: 0.0, hi: 1.0, step: 0.25 }] };
        assert_eq!(d.inputs().len(), 5);
    }
}
