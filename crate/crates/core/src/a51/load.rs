use super::{load, CipherParams};

#[inline]
fn parity(x: u64) -> u64 {
    u64::from(x.count_ones() & 1)
}

#[derive(Clone, Debug)]
struct PivotRow {
    col: u32,
    /// Coefficients over key bits in reduced form.
    coef: u64,
    /// Which original state bits were summed into this row.
    combo: u64,
}

/// Inverts the (linear) key/frame load phase over GF(2).
///
/// Loading maps `(kc, frame)` to `M·kc ⊕ F(frame)`. This precomputes a
/// reduced row-echelon form of `M` so that every key consistent with a
/// given post-load state can be enumerated.
#[derive(Clone, Debug)]
pub struct LoadInverse {
    params: CipherParams,
    pivots: Vec<PivotRow>,
    /// Combinations of state bits that must XOR to zero for a solution.
    consistency: Vec<u64>,
    free: Vec<u32>,
}

impl LoadInverse {
    pub fn new(params: &CipherParams) -> Self {
        let width = params.state_bits();
        let columns: Vec<u64> = (0..params.key_bits)
            .map(|j| load(params, 1u64 << j, 0).pack(params))
            .collect();
        let mut rows: Vec<(u64, u64)> = (0..width)
            .map(|i| {
                let coef = columns
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, c)| acc | (((c >> i) & 1) << j));
                (coef, 1u64 << i)
            })
            .collect();

        let mut pivots = Vec::new();
        let mut free = Vec::new();
        let mut next = 0usize;
        for col in 0..params.key_bits {
            let bit = 1u64 << col;
            let Some(found) = (next..rows.len()).find(|&r| rows[r].0 & bit != 0) else {
                free.push(col);
                continue;
            };
            rows.swap(next, found);
            let (pc, pt) = rows[next];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && row.0 & bit != 0 {
                    row.0 ^= pc;
                    row.1 ^= pt;
                }
            }
            pivots.push(next);
            next += 1;
        }
        let pivot_rows = pivots
            .iter()
            .map(|&r| {
                let (coef, combo) = rows[r];
                PivotRow {
                    col: coef.trailing_zeros(),
                    coef,
                    combo,
                }
            })
            .collect();
        let consistency = rows[next..].iter().map(|&(_, combo)| combo).collect();
        LoadInverse {
            params: params.clone(),
            pivots: pivot_rows,
            consistency,
            free,
        }
    }

    /// Dimension of the key space mapping onto a single loaded state.
    pub fn kernel_dim(&self) -> usize {
        self.free.len()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Contribution of the frame number to the loaded state.
    pub fn frame_vector(&self, frame: u32) -> u64 {
        load(&self.params, 0, frame).pack(&self.params)
    }

    /// All keys whose load phase with `frame` yields `loaded` (packed).
    /// Returns `None` when more than `limit` keys would be produced.
    pub fn keys_for(&self, loaded: u64, frame: u32, limit: usize) -> Option<Vec<u64>> {
        let target = loaded ^ self.frame_vector(frame);
        if self.consistency.iter().any(|&c| parity(c & target) != 0) {
            return Some(Vec::new());
        }
        let count = 1usize.checked_shl(self.free.len() as u32)?;
        if count > limit {
            return None;
        }
        let base: Vec<u64> = self
            .pivots
            .iter()
            .map(|p| parity(p.combo & target))
            .collect();
        let mut out = Vec::with_capacity(count);
        for assignment in 0..count as u64 {
            let mut x = self.free.iter().enumerate().fold(0u64, |acc, (i, &col)| {
                acc | (((assignment >> i) & 1) << col)
            });
            let free_bits = x;
            for (p, &b) in self.pivots.iter().zip(base.iter()) {
                let others = p.coef & !(1u64 << p.col);
                x |= (b ^ parity(others & free_bits)) << p.col;
            }
            out.push(x);
        }
        Some(out)
    }
}
