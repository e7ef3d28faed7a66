use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STRATEGY_CAP: usize = 4096;

/// All deterministic response functions `λ : x ↦ a`, indexed in mixed radix:
/// `λ = Σ_x a_x k^x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategySet {
    settings: usize,
    outcomes: usize,
    count: usize,
}

impl DeterministicStrategySet {
    pub fn new(settings: usize, outcomes: usize) -> Result<Self> {
        let count = u32::try_from(settings)
            .ok()
            .and_then(|m| outcomes.checked_pow(m))
            .unwrap_or(usize::MAX);
        if count > STRATEGY_CAP {
            return Err(Error::StrategyCap { count, cap: STRATEGY_CAP });
        }
        Ok(DeterministicStrategySet { settings, outcomes, count })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn settings(&self) -> usize {
        self.settings
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// Outcome assigned to setting `x` by strategy `lambda`.
    pub fn response(&self, lambda: usize, x: usize) -> usize {
        (lambda / self.outcomes.pow(x as u32)) % self.outcomes
    }

    /// `D_λ(a|x)`
    pub fn indicator(&self, lambda: usize, a: usize, x: usize) -> bool {
        self.response(lambda, x) == a
    }

    pub fn table(&self, lambda: usize) -> Vec<usize> {
        (0..self.settings).map(|x| self.response(lambda, x)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.count).map(|l| self.table(l))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    #[test]
    fn enumeration_is_complete_and_unique() {
        for (m, k) in [(1, 1), (2, 2), (3, 2), (2, 3), (4, 3)] {
            let s = DeterministicStrategySet::new(m, k).unwrap();
            assert_eq!(s.len(), k.pow(m as u32));
            let all: HashSet<Vec<usize>> = s.iter().collect();
            assert_eq!(all.len(), s.len());
            assert!(all.iter().all(|t| t.len() == m && t.iter().all(|&a| a < k)));
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(DeterministicStrategySet::new(12, 2).is_ok());
        assert!(matches!(DeterministicStrategySet::new(13, 2), Err(Error::StrategyCap { .. })));
        assert!(DeterministicStrategySet::new(100, 3).is_err());
    }
}
