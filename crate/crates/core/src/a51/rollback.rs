use super::{
    advance, clock_backward, key_setup, CipherParams, CipherState, LoadInverse, SessionKey,
};

/// Default cap on the number of states visited while clocking backwards.
pub const DEFAULT_NODE_BUDGET: u64 = 1 << 22;

/// Keys per loaded state beyond which enumeration is refused.
const MAX_KERNEL_KEYS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecoverError {
    #[error("backward search exceeded its budget of {budget} states")]
    BudgetExceeded { budget: u64 },
    #[error("frame number {frame} does not fit in {bits} bits")]
    FrameOutOfRange { frame: u32, bits: u32 },
    #[error("state does not fit the register geometry")]
    InvalidState,
}

/// Reusable state-to-key inversion for one cipher geometry.
#[derive(Clone, Debug)]
pub struct KeyRecovery {
    params: CipherParams,
    inverse: LoadInverse,
    node_budget: u64,
}

impl KeyRecovery {
    pub fn new(params: &CipherParams) -> Self {
        KeyRecovery {
            params: params.clone(),
            inverse: LoadInverse::new(params),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    pub fn params(&self) -> &CipherParams {
        &self.params
    }

    /// Every key that, set up with `frame` and advanced `offset` clocks past
    /// setup, lands exactly on `state`. Sorted, without duplicates.
    pub fn recover(
        &self,
        state: &CipherState,
        frame: u32,
        offset: usize,
    ) -> Result<Vec<SessionKey>, RecoverError> {
        let p = &self.params;
        if p.frame_bits < 32 && frame >> p.frame_bits != 0 {
            return Err(RecoverError::FrameOutOfRange {
                frame,
                bits: p.frame_bits,
            });
        }
        if !state.is_valid(p) {
            return Err(RecoverError::InvalidState);
        }
        let depth = offset + p.mix_clocks as usize;

        let mut loaded = Vec::new();
        let mut visited = 0u64;
        let mut stack = vec![(*state, 0usize)];
        while let Some((s, d)) = stack.pop() {
            visited += 1;
            if visited > self.node_budget {
                return Err(RecoverError::BudgetExceeded {
                    budget: self.node_budget,
                });
            }
            if d == depth {
                loaded.push(s);
                continue;
            }
            stack.extend(clock_backward(p, &s).into_iter().map(|prev| (prev, d + 1)));
        }

        let mut keys = Vec::new();
        for s in loaded {
            let Some(candidates) = self.inverse.keys_for(s.pack(p), frame, MAX_KERNEL_KEYS) else {
                return Err(RecoverError::BudgetExceeded {
                    budget: self.node_budget,
                });
            };
            visited += candidates.len() as u64;
            if visited > self.node_budget {
                return Err(RecoverError::BudgetExceeded {
                    budget: self.node_budget,
                });
            }
            for kc in candidates {
                let key = SessionKey::new(kc);
                let reached = key_setup(p, key, frame).map(|s0| advance(p, &s0, offset));
                if reached.as_ref() == Ok(state) {
                    keys.push(key);
                }
            }
        }
        keys.sort();
        keys.dedup();
        Ok(keys)
    }
}

/// One-shot key recovery with the default node budget.
pub fn recover_key(
    params: &CipherParams,
    state: &CipherState,
    frame: u32,
    offset: usize,
) -> Result<Vec<SessionKey>, RecoverError> {
    KeyRecovery::new(params).recover(state, frame, offset)
}
