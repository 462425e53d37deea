//! Text container for frozen quadratic instances.
//!
//! ```text
//! # slises quadratic instance v1
//! seed = 42
//! n = 3
//! N = 2
//! lipschitz = 98.1
//! fstar = 12.5
//! xstar = x1 x2 x3
//! component 1
//! b = b1 b2 b3
//! a = a11 a12 a13
//! a = a21 a22 a23
//! a = a31 a32 a33
//! component 2
//! ...
//! ```
//!
//! Every number is written in shortest round-trip form, so reloading
//! reproduces the instance bit for bit.

use std::path::Path;

use nalgebra::DMatrix;

use super::csv::{fmt_f64, parse_f64};
use super::write_atomic;
use crate::error::{Error, Result};
use crate::problems::{FiniteSum, Minimizer, QuadraticComponent, QuadraticSum};
use crate::Vector;

const MAGIC: &str = "# slises quadratic instance v1";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt_f64).collect::<Vec<_>>().join(" ")
}

pub fn write_instance(problem: &QuadraticSum) -> String {
    let n = problem.dim();
    let min = problem.minimizer().expect("quadratics carry their minimizer");
    let mut lines = vec![
        MAGIC.to_string(),
        format!("seed = {}", problem.seed().map_or("none".into(), |s| s.to_string())),
        format!("n = {n}"),
        format!("N = {}", problem.num_components()),
        format!("lipschitz = {}", fmt_f64(problem.lipschitz().unwrap_or(f64::NAN))),
        format!("fstar = {}", fmt_f64(min.value)),
        format!("xstar = {}", join(min.x.iter().copied())),
    ];
    for (i, c) in problem.components().iter().enumerate() {
        lines.push(format!("component {}", i + 1));
        lines.push(format!("b = {}", join(c.b.iter().copied())));
        for r in 0..n {
            lines.push(format!("a = {}", join(c.a.row(r).iter().copied())));
        }
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

pub fn save_instance(problem: &QuadraticSum, path: &Path) -> Result<()> {
    write_atomic(path, &write_instance(problem))
}

pub fn load_instance(path: &Path) -> Result<QuadraticSum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_instance(&text, &path.display().to_string())
}

pub fn parse_instance(text: &str, origin: &str) -> Result<QuadraticSum> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    if lines.next().map(|(_, l)| l) != Some(MAGIC) {
        return Err(err(1, "not a quadratic instance file".into()));
    }
    let field = |line: Option<(usize, &str)>, expect: &str| -> Result<(usize, String)> {
        match line {
            Some((no, l)) => {
                let value = l
                    .strip_prefix(expect)
                    .map(str::trim_start)
                    .and_then(|rest| rest.strip_prefix('='))
                    .ok_or_else(|| err(no, format!("expected '{expect} = ...'")))?;
                Ok((no, value.trim().to_string()))
            }
            None => Err(err(0, format!("unexpected end of file, expected '{expect}'"))),
        }
    };
    let floats = |no: usize, s: &str, len: usize| -> Result<Vec<f64>> {
        let v: Option<Vec<f64>> = s.split_whitespace().map(parse_f64).collect();
        match v {
            Some(v) if v.len() == len => Ok(v),
            _ => Err(err(no, format!("expected {len} numbers"))),
        }
    };

    let (no, seed) = field(lines.next(), "seed")?;
    let seed = match seed.as_str() {
        "none" => None,
        s => Some(s.parse::<u64>().map_err(|_| err(no, "bad seed".into()))?),
    };
    let (no, n) = field(lines.next(), "n")?;
    let n: usize = n.parse().map_err(|_| err(no, "bad n".into()))?;
    let (no, count) = field(lines.next(), "N")?;
    let count: usize = count.parse().map_err(|_| err(no, "bad N".into()))?;
    let (no, l) = field(lines.next(), "lipschitz")?;
    let lipschitz = floats(no, &l, 1)?[0];
    let (no, f) = field(lines.next(), "fstar")?;
    let fstar = floats(no, &f, 1)?[0];
    let (no, xs) = field(lines.next(), "xstar")?;
    let xstar = Vector::from_vec(floats(no, &xs, n)?);

    let mut components = Vec::with_capacity(count);
    for i in 0..count {
        match lines.next() {
            Some((_, l)) if l == format!("component {}", i + 1) => {}
            Some((no, _)) => return Err(err(no, format!("expected 'component {}'", i + 1))),
            None => return Err(err(0, "truncated instance".into())),
        }
        let (no, b) = field(lines.next(), "b")?;
        let b = Vector::from_vec(floats(no, &b, n)?);
        let mut rows = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (no, a) = field(lines.next(), "a")?;
            rows.extend(floats(no, &a, n)?);
        }
        components.push(QuadraticComponent {
            a: DMatrix::from_row_slice(n, n, &rows),
            b,
        });
    }
    let label = format!("quadratic(n={n},N={count})");
    Ok(QuadraticSum::from_parts(
        components,
        lipschitz,
        Minimizer { x: xstar, value: fstar },
        seed,
        label,
    ))
}
