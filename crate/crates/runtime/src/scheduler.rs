//! Loop rates and the deterministic virtual-time scheduler.

use serde::{Deserialize, Serialize};

/// Loop frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopRates {
    pub filter: u32,
    pub map: u32,
    pub mp: u32,
    pub pcp: u32,
    pub sim: u32,
}

impl Default for LoopRates {
    fn default() -> Self {
        Self {
            filter: 30,
            map: 10,
            mp: 12,
            pcp: 60,
            sim: 240,
        }
    }
}

impl LoopRates {
    pub fn is_valid(&self) -> bool {
        self.as_array().iter().all(|r| *r > 0)
    }

    fn as_array(&self) -> [u32; 5] {
        [self.filter, self.map, self.mp, self.pcp, self.sim]
    }
}

/// The loops, in the order they run when due at the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LoopId {
    Filter,
    Map,
    Mp,
    Pcp,
    Sim,
}

const ORDER: [LoopId; 5] = [LoopId::Filter, LoopId::Map, LoopId::Mp, LoopId::Pcp, LoopId::Sim];

/// One due tick: loop `id` at time `k / rate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tick {
    pub id: LoopId,
    pub k: u64,
    pub rate: u32,
}

impl Tick {
    pub fn time(&self) -> f64 {
        self.k as f64 / self.rate as f64
    }
}

/// Yields ticks of all loops in time order using exact rational
/// comparisons, so the interleaving never depends on rounding.
#[derive(Debug, Clone)]
pub struct VirtualScheduler {
    rates: [u32; 5],
    next: [u64; 5],
}

impl VirtualScheduler {
    pub fn new(rates: LoopRates) -> Self {
        assert!(rates.is_valid(), "loop rates must be positive");
        Self {
            rates: rates.as_array(),
            next: [0; 5],
        }
    }
}

impl Iterator for VirtualScheduler {
    type Item = Tick;

    fn next(&mut self) -> Option<Tick> {
        let mut best = 0;
        for i in 1..5 {
            // k_i / r_i < k_b / r_b without division.
            let lhs = self.next[i] as u128 * self.rates[best] as u128;
            let rhs = self.next[best] as u128 * self.rates[i] as u128;
            if lhs < rhs {
                best = i;
            }
        }
        let tick = Tick {
            id: ORDER[best],
            k: self.next[best],
            rate: self.rates[best],
        };
        self.next[best] += 1;
        Some(tick)
    }
}
