//! Integer frequency lattice of the 3-torus, truncated to a Euclidean ball.
//!
//! Modes `n` with `|n| <= N` are enumerated in lexicographic order of
//! `(n1, n2, n3)`. Negation reverses this order, so the partner of the mode at
//! index `i` sits at `len - 1 - i`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mode = [i32; 3];

#[inline]
pub fn norm_sq(n: Mode) -> i64 {
    n.iter().map(|&c| i64::from(c) * i64::from(c)).sum()
}

/// Japanese bracket `(1 + |n|^2)^{1/2}`.
#[inline]
pub fn bracket(n: Mode) -> f64 {
    (1.0 + norm_sq(n) as f64).sqrt()
}

/// Smallest integer `>= min` whose prime factors are all in {2, 3, 5}.
pub fn fft_friendly(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Cutoff `N` together with the uniform grid size `M` used to evaluate
/// nonlinearities of fields living on `|n| <= N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyBox {
    cutoff: u32,
    grid: usize,
}

impl FrequencyBox {
    /// Box with the default padding `M >= 4N + 1`, which keeps cubic products
    /// projected back onto `|n| <= N` free of aliasing.
    pub fn new(cutoff: u32) -> Self {
        Self {
            cutoff,
            grid: fft_friendly(4 * cutoff as usize + 1),
        }
    }

    pub fn with_grid(cutoff: u32, grid: usize) -> Result<Self> {
        if grid < 3 * cutoff as usize + 1 {
            return Err(Error::InvalidParameter(format!(
                "grid {grid} is below 3N+1 = {} for cutoff {cutoff}",
                3 * cutoff as usize + 1
            )));
        }
        Ok(Self { cutoff, grid })
    }

    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    #[inline]
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn modes(&self) -> Arc<ModeTable> {
        ModeTable::for_cutoff(self.cutoff)
    }

    pub fn len(&self) -> usize {
        self.modes().len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: Mode) -> bool {
        norm_sq(n) <= i64::from(self.cutoff) * i64::from(self.cutoff)
    }
}

/// A contiguous run of modes sharing `(n1, n2)`; `n3` spans `-half..=half`.
#[derive(Clone, Copy, Debug)]
pub struct Row {
    pub n1: i32,
    pub n2: i32,
    pub start: usize,
    pub half: i32,
}

#[derive(Debug)]
pub struct ModeTable {
    cutoff: u32,
    modes: Vec<Mode>,
    norm_sq: Vec<u32>,
    rows: Vec<Row>,
    // (n1 + N) * (2N + 1) + (n2 + N) -> index into `rows`
    row_lookup: Vec<u32>,
}

const NO_ROW: u32 = u32::MAX;

impl ModeTable {
    fn build(cutoff: u32) -> Self {
        let n = cutoff as i32;
        let r2 = i64::from(n) * i64::from(n);
        let side = (2 * n + 1) as usize;
        let mut modes = Vec::new();
        let mut norms = Vec::new();
        let mut rows = Vec::new();
        let mut row_lookup = vec![NO_ROW; side * side];
        for n1 in -n..=n {
            for n2 in -n..=n {
                let rest = r2 - i64::from(n1) * i64::from(n1) - i64::from(n2) * i64::from(n2);
                if rest < 0 {
                    continue;
                }
                let half = isqrt(rest as u64) as i32;
                row_lookup[(n1 + n) as usize * side + (n2 + n) as usize] = rows.len() as u32;
                rows.push(Row {
                    n1,
                    n2,
                    start: modes.len(),
                    half,
                });
                for n3 in -half..=half {
                    let m = [n1, n2, n3];
                    modes.push(m);
                    norms.push(norm_sq(m) as u32);
                }
            }
        }
        Self {
            cutoff,
            modes,
            norm_sq: norms,
            rows,
            row_lookup,
        }
    }

    /// Shared table for a cutoff; tables are immutable and cached process-wide.
    pub fn for_cutoff(cutoff: u32) -> Arc<ModeTable> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ModeTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("mode table cache poisoned").get(&cutoff) {
            return Arc::clone(t);
        }
        let table = Arc::new(ModeTable::build(cutoff));
        cache
            .lock()
            .expect("mode table cache poisoned")
            .entry(cutoff)
            .or_insert(table)
            .clone()
    }

    #[inline]
    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    #[inline]
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    #[inline]
    pub fn norm_sq(&self) -> &[u32] {
        &self.norm_sq
    }

    #[inline]
    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    #[inline]
    pub fn neg_index(&self, i: usize) -> usize {
        self.modes.len() - 1 - i
    }

    /// Index of the zero mode (always present).
    #[inline]
    pub fn zero_index(&self) -> usize {
        self.modes.len() / 2
    }

    pub fn index_of(&self, m: Mode) -> Option<usize> {
        let n = self.cutoff as i32;
        if m.iter().any(|&c| c.abs() > n) {
            return None;
        }
        let side = (2 * n + 1) as usize;
        let r = self.row_lookup[(m[0] + n) as usize * side + (m[1] + n) as usize];
        if r == NO_ROW {
            return None;
        }
        let row = self.rows[r as usize];
        if m[2].abs() > row.half {
            return None;
        }
        Some(row.start + (m[2] + row.half) as usize)
    }

    /// For every mode of `self`, its index in the larger table `outer`.
    pub fn embedding_into(&self, outer: &ModeTable) -> Vec<usize> {
        assert!(outer.cutoff >= self.cutoff, "embedding needs a larger table");
        self.modes
            .iter()
            .map(|&m| outer.index_of(m).expect("inner mode missing from outer table"))
            .collect()
    }
}

fn isqrt(v: u64) -> u64 {
    let mut r = (v as f64).sqrt() as u64;
    while r * r > v {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= v {
        r += 1;
    }
    r
}

/// Littlewood-Paley block of a mode: 0 for `|n| <= 1`, otherwise the `j >= 1`
/// with `2^{j-1} < |n| <= 2^j`.
#[inline]
pub fn block_of(norm_sq: u32) -> u32 {
    if norm_sq <= 1 {
        return 0;
    }
    let mut j = 1;
    while u64::from(norm_sq) > 1u64 << (2 * j) {
        j += 1;
    }
    j
}

/// Number of Littlewood-Paley blocks touched by a cutoff.
pub fn block_count(cutoff: u32) -> u32 {
    block_of(cutoff * cutoff) + 1
}
