use serde::{Deserialize, Serialize};

use super::auth::Subscriber;
use crate::a51::CipherParams;

/// Largest mobile allocation a channel can hop over.
pub const MAX_ALLOCATION: usize = 64;
/// The cell allocation is broadcast as a bitmap over this many channels
/// above the lowest one.
pub const ALLOCATION_SPAN: u16 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    /// Hopping parameters are sent after ciphering starts.
    Early,
    /// Hopping parameters are sent in the clear before authentication.
    Immediate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CipherMode {
    None,
    A51,
    /// A keyed stream the attacker cannot invert, standing in for A5/3.
    StrongOpaque,
}

impl CipherMode {
    /// Algorithm identifier carried by the cipher mode command.
    pub fn id(self) -> u8 {
        match self {
            CipherMode::None => 0,
            CipherMode::A51 => 1,
            CipherMode::StrongOpaque => 3,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(CipherMode::None),
            1 => Some(CipherMode::A51),
            3 => Some(CipherMode::StrongOpaque),
            _ => None,
        }
    }
}

impl std::str::FromStr for AssignmentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "early" => Ok(AssignmentMode::Early),
            "immediate" => Ok(AssignmentMode::Immediate),
            other => Err(format!("unknown assignment mode `{other}`")),
        }
    }
}

impl std::str::FromStr for CipherMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(CipherMode::None),
            "a51" => Ok(CipherMode::A51),
            "strong_opaque" => Ok(CipherMode::StrongOpaque),
            other => Err(format!("unknown cipher `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CellError {
    #[error("channel allocation is empty")]
    EmptyAllocation,
    #[error("channel allocation has {0} entries, at most {MAX_ALLOCATION} allowed")]
    AllocationTooLarge(usize),
    #[error("channel {0} appears twice in the allocation")]
    DuplicateChannel(u16),
    #[error("allocation spans more than {ALLOCATION_SPAN} channels")]
    AllocationSpan,
    #[error("hsn {0} out of range 0..=63")]
    Hsn(u8),
    #[error("maio {maio} must be below the allocation size {size}")]
    Maio { maio: u8, size: usize },
    #[error("{decoys} decoy users do not fit beside the target")]
    TooManyDecoys { decoys: u8 },
    #[error("a session needs at least one traffic block")]
    NoTraffic,
}

/// Radio and security configuration of the observed cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellConfig {
    pub cell_id: u16,
    /// Channels of the hopping allocation.
    pub arfcn_allocation: Vec<u16>,
    pub hsn: u8,
    pub maio: u8,
    pub hopping_enabled: bool,
    pub assignment_mode: AssignmentMode,
    pub cipher: CipherMode,
    pub random_padding: bool,
    pub weak_keys: bool,
    /// Carrier of the common control channel (slot 0).
    pub control_arfcn: u16,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            cell_id: 1,
            arfcn_allocation: vec![10, 14, 19, 23, 27, 31, 35, 40],
            hsn: 21,
            maio: 0,
            hopping_enabled: true,
            assignment_mode: AssignmentMode::Early,
            cipher: CipherMode::A51,
            random_padding: false,
            weak_keys: false,
            control_arfcn: 2,
        }
    }
}

impl CellConfig {
    pub fn validate(&self) -> Result<(), CellError> {
        let alloc = &self.arfcn_allocation;
        if alloc.is_empty() {
            return Err(CellError::EmptyAllocation);
        }
        if alloc.len() > MAX_ALLOCATION {
            return Err(CellError::AllocationTooLarge(alloc.len()));
        }
        let mut sorted = alloc.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(CellError::DuplicateChannel(w[0]));
        }
        if sorted[sorted.len() - 1] - sorted[0] >= ALLOCATION_SPAN {
            return Err(CellError::AllocationSpan);
        }
        if self.hsn > 63 {
            return Err(CellError::Hsn(self.hsn));
        }
        if usize::from(self.maio) >= alloc.len() {
            return Err(CellError::Maio {
                maio: self.maio,
                size: alloc.len(),
            });
        }
        Ok(())
    }

    /// Largest number of decoy users the traffic channel can carry.
    pub fn max_decoys(&self) -> u8 {
        if self.hopping_enabled {
            (self.arfcn_allocation.len() - 1) as u8
        } else {
            // one slot per user, slot 0 is the control channel
            6
        }
    }
}

/// Per-session parameters that are not properties of the cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub cipher_params: CipherParams,
    pub traffic_blocks: u32,
    /// Other users hopping on the same slot with different MAIO (or on
    /// other slots without hopping).
    pub decoys: u8,
    pub subscriber: Subscriber,
    /// Replayed challenge; a fresh one is drawn when `None`.
    pub rand: Option<[u8; 16]>,
}

impl SessionConfig {
    pub fn new(cipher_params: CipherParams) -> Self {
        SessionConfig {
            cipher_params,
            traffic_blocks: 12,
            decoys: 3,
            subscriber: Subscriber::default(),
            rand: None,
        }
    }

    pub fn validate(&self, cell: &CellConfig) -> Result<(), CellError> {
        cell.validate()?;
        if self.traffic_blocks == 0 {
            return Err(CellError::NoTraffic);
        }
        if self.decoys > cell.max_decoys() {
            return Err(CellError::TooManyDecoys {
                decoys: self.decoys,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cell_is_valid() {
        CellConfig::default().validate().unwrap();
    }

    #[test]
    fn invalid_cells() {
        let mut c = CellConfig::default();
        c.arfcn_allocation.clear();
        assert_eq!(c.validate(), Err(CellError::EmptyAllocation));
        c.arfcn_allocation = vec![3, 5, 3];
        assert_eq!(c.validate(), Err(CellError::DuplicateChannel(3)));
        c.arfcn_allocation = vec![3, 5];
        c.maio = 2;
        assert!(matches!(c.validate(), Err(CellError::Maio { .. })));
        c.maio = 0;
        c.hsn = 64;
        assert_eq!(c.validate(), Err(CellError::Hsn(64)));
        c.hsn = 0;
        c.arfcn_allocation = (0..65).collect();
        assert_eq!(c.validate(), Err(CellError::AllocationTooLarge(65)));
    }

    #[test]
    fn cipher_ids_roundtrip() {
        for m in [CipherMode::None, CipherMode::A51, CipherMode::StrongOpaque] {
            assert_eq!(CipherMode::from_id(m.id()), Some(m));
        }
    }
}
