//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use dgldpc::{BinaryMatrix, ComponentCode, Ensemble, ValidatedEnsemble};
use rand::Rng;

pub const HAMMING74: &str = "1000110\n0100101\n0010011\n0001111";
pub const C32: &str = "101\n011";

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Every ensemble fixture, sorted by file name.
pub fn ensemble_fixtures() -> Vec<(String, ValidatedEnsemble)> {
    let mut names: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names.into_iter().map(|n| { let e = load(&n); (n, e) }).collect()
}

pub fn load(name: &str) -> ValidatedEnsemble {
    let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
    Ensemble::from_json(&text).unwrap().validate().unwrap()
}

pub fn code(text: &str) -> ComponentCode {
    ComponentCode::new(text.parse().unwrap()).unwrap()
}

/// Rows of 0/1 bytes; the oracles below work on this plain form only.
pub type Rows = Vec<Vec<u8>>;

pub fn rows_of(m: &BinaryMatrix) -> Rows {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c) as u8).collect()).collect()
}

pub fn matrix_of(rows: &Rows) -> BinaryMatrix {
    let text: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect())
        .collect();
    text.join("\n").parse().unwrap()
}

/// Schoolbook Gaussian elimination over GF(2) on byte rows.
pub fn rank_oracle(rows: &Rows) -> usize {
    let mut m = rows.clone();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] == 1) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] == 1 {
                let pivot = m[rank].clone();
                for (x, y) in m[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Minimum weight over all nonzero messages, by plain enumeration.
pub fn min_distance_oracle(rows: &Rows) -> usize {
    let k = rows.len();
    let n = rows[0].len();
    let mut best = usize::MAX;
    for msg in 1u32..(1 << k) {
        let mut word = vec![0u8; n];
        for (i, row) in rows.iter().enumerate() {
            if msg >> i & 1 == 1 {
                for j in 0..n {
                    word[j] ^= row[j];
                }
            }
        }
        best = best.min(word.iter().filter(|&&b| b == 1).count());
    }
    best
}

/// Uniform random full-rank `k × n` generator.
pub fn random_full_rank(rng: &mut impl Rng, n: usize, k: usize) -> Rows {
    loop {
        let rows: Rows = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..2u8)).collect()).collect();
        if rank_oracle(&rows) == k {
            return rows;
        }
    }
}

/// Random row operations (additions and swaps) on a generator.
pub fn scramble_rows(rng: &mut impl Rng, rows: &Rows, steps: usize) -> Rows {
    let mut m = rows.clone();
    let k = m.len();
    if k < 2 {
        return m;
    }
    for _ in 0..steps {
        let a = rng.gen_range(0..k);
        let b = (a + rng.gen_range(1..k)) % k;
        if rng.gen_bool(0.5) {
            m.swap(a, b);
        } else {
            let src = m[b].clone();
            for (x, y) in m[a].iter_mut().zip(src) {
                *x ^= y;
            }
        }
    }
    m
}

/// Centered difference at `x` with step `h`.
pub fn centered(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
