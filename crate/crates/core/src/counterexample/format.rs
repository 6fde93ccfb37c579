//! Plain-text schedule format.
//!
//! ```text
//! # comment
//! p 3
//! mode desk
//! budget 8
//! tolerance 0.125
//! level L=3 J=1 I=1 n=16
//! level L=16 J=5000000000 I=70 n=2^123456
//! ```
//!
//! Integers are decimal; `n` may be written `2^E` with a decimal exponent.

use std::fmt::Write as _;

use num_bigint::BigUint;

use super::schedule::{LevelParams, Magnitude, Mode, Schedule};
use crate::error::{Error, Result};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| perr(line, format!("{key}: not a number: {v:?}")))?;
    if !x.is_finite() {
        return Err(perr(line, format!("{key}: not finite")));
    }
    Ok(x)
}

fn parse_big(line: usize, key: &str, v: &str) -> Result<BigUint> {
    if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
        return Err(perr(line, format!("{key}: not a decimal integer: {v:?}")));
    }
    v.parse().map_err(|_| perr(line, format!("{key}: bad integer")))
}

fn parse_magnitude(line: usize, v: &str) -> Result<Magnitude> {
    match v.strip_prefix("2^") {
        Some(e) => Ok(Magnitude::Pow2(parse_big(line, "n", e)?)),
        None => Ok(Magnitude::Exact(parse_big(line, "n", v)?)),
    }
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut p = None;
    let mut mode = None;
    let mut budget = None;
    let mut tolerance = None;
    let mut levels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let key = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        let single = |rest: &[&str]| -> Result<String> {
            match rest {
                [v] => Ok(v.to_string()),
                _ => Err(perr(line, format!("{key}: expected one value"))),
            }
        };
        match key {
            "p" => p = Some(parse_f64(line, "p", &single(&rest)?)?),
            "budget" => budget = Some(parse_f64(line, "budget", &single(&rest)?)?),
            "tolerance" => tolerance = Some(parse_f64(line, "tolerance", &single(&rest)?)?),
            "mode" => {
                mode = Some(match single(&rest)?.as_str() {
                    "desk" => Mode::Desk,
                    "faithful" => Mode::Faithful,
                    other => return Err(perr(line, format!("unknown mode {other:?}"))),
                })
            }
            "level" => {
                let (mut big_l, mut j, mut i, mut n) = (None, None, None, None);
                for kv in rest {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| perr(line, format!("expected key=value, got {kv:?}")))?;
                    let dup = match k {
                        "L" => big_l.replace(parse_f64(line, "L", v)?).is_some(),
                        "J" => j.replace(parse_big(line, "J", v)?).is_some(),
                        "I" => {
                            let iv = parse_big(line, "I", v)?;
                            let iv = u64::try_from(iv).map_err(|_| perr(line, "I: exceeds 64 bits"))?;
                            i.replace(iv).is_some()
                        }
                        "n" => n.replace(parse_magnitude(line, v)?).is_some(),
                        other => return Err(perr(line, format!("unknown level key {other:?}"))),
                    };
                    if dup {
                        return Err(perr(line, format!("duplicate key {k}")));
                    }
                }
                let big_l = big_l.ok_or_else(|| perr(line, "missing L"))?;
                if big_l <= 0.0 {
                    return Err(perr(line, "L must be positive"));
                }
                levels.push(LevelParams {
                    big_l,
                    j: j.ok_or_else(|| perr(line, "missing J"))?,
                    i: i.ok_or_else(|| perr(line, "missing I"))?,
                    n: n.ok_or_else(|| perr(line, "missing n"))?,
                });
            }
            other => return Err(perr(line, format!("unknown key {other:?}"))),
        }
    }
    let p = p.ok_or_else(|| perr(0, "missing p"))?;
    if p <= 2.0 {
        return Err(perr(0, "p must exceed 2"));
    }
    if levels.is_empty() {
        return Err(perr(0, "no levels"));
    }
    Ok(Schedule {
        p,
        mode: mode.unwrap_or(Mode::Desk),
        budget: budget.unwrap_or(f64::INFINITY),
        tolerance: tolerance.unwrap_or(f64::INFINITY),
        levels,
    })
}

pub fn write_schedule(s: &Schedule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p {}", s.p);
    let _ = writeln!(out, "mode {}", s.mode.as_str());
    if s.budget.is_finite() {
        let _ = writeln!(out, "budget {}", s.budget);
    }
    if s.tolerance.is_finite() {
        let _ = writeln!(out, "tolerance {}", s.tolerance);
    }
    for lv in &s.levels {
        let _ = writeln!(out, "level L={} J={} I={} n={}", lv.big_l, lv.j, lv.i, lv.n);
    }
    out
}
