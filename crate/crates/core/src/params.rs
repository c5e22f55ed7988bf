//! Circuit super-parameters.

use thiserror::Error;

/// Shape of one distinct-identity circuit: `nx` unknowns, uniform degree
/// `np`, and `k` neighbor disequations. Keys, circuits, and wire messages are
/// all indexed by this tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircuitParams {
    nx: u16,
    np: u16,
    k: u16,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("nx must be at least 2, got {0}")]
    BadUnknownCount(u16),
    #[error("np must be a power of 2 and at least 2, got {0}")]
    BadDegree(u16),
    #[error("k must be at least 1, got {0}")]
    BadNeighborCount(u16),
}

impl CircuitParams {
    pub fn new(nx: u16, np: u16, k: u16) -> Result<Self, ParamsError> {
        if nx < 2 {
            return Err(ParamsError::BadUnknownCount(nx));
        }
        if np < 2 || !np.is_power_of_two() {
            return Err(ParamsError::BadDegree(np));
        }
        if k < 1 {
            return Err(ParamsError::BadNeighborCount(k));
        }
        Ok(Self { nx, np, k })
    }

    /// Number of unknowns in the quiz equations.
    pub fn nx(&self) -> u16 {
        self.nx
    }

    /// Degree of every unknown (a power of 2).
    pub fn np(&self) -> u16 {
        self.np
    }

    /// Number of neighbor disequations covered by one proof.
    pub fn k(&self) -> u16 {
        self.k
    }

    /// log2(np): squarings per power chain.
    pub fn log2_np(&self) -> u32 {
        self.np.trailing_zeros()
    }

    /// Length of the public-input vector: `(k + 1) * (nx + 1)` elements,
    /// laid out as own coefficients, own constant, then per neighbor its
    /// coefficients followed by its constant.
    pub fn instance_len(&self) -> usize {
        (self.k as usize + 1) * (self.nx as usize + 1)
    }
}

impl std::fmt::Display for CircuitParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.nx, self.np, self.k)
    }
}

impl std::str::FromStr for CircuitParams {
    type Err = String;

    /// Parses the CLI form `nx,np,k`, e.g. `4,8,1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected nx,np,k but got {s:?}"));
        }
        let nums: Vec<u16> = parts
            .iter()
            .map(|p| p.parse::<u16>().map_err(|e| format!("bad number {p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        CircuitParams::new(nums[0], nums[1], nums[2]).map_err(|e| e.to_string())
    }
}
