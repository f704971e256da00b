use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxFindMode {
    /// Statevector simulation of every Grover iterate.
    Amplitude,
    /// Exact argmax with the query cost charged from the Grover schedule.
    #[default]
    Accounting,
}

impl std::str::FromStr for MaxFindMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "amplitude" => Ok(Self::Amplitude),
            "accounting" => Ok(Self::Accounting),
            other => Err(format!("unknown mode {other:?} (amplitude|accounting)")),
        }
    }
}

/// Query counts for one max-finding run, or a sum of runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    pub mode: MaxFindMode,
    /// Value-oracle applications: Grover iterates plus one read per measurement.
    pub oracle_calls: u64,
    pub grover_iterations: u64,
    pub measurements: u64,
    /// What a linear scan over the same family would have cost.
    pub classical_equiv_cost: u64,
    /// Comparator steps spent by the membership test, `l-1` per oracle call.
    pub membership_comparisons: u64,
    /// Number of max-finding runs summed into this ledger.
    pub searches: u64,
}

impl QueryLedger {
    pub fn new(mode: MaxFindMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn absorb(&mut self, other: &QueryLedger) {
        self.oracle_calls += other.oracle_calls;
        self.grover_iterations += other.grover_iterations;
        self.measurements += other.measurements;
        self.classical_equiv_cost += other.classical_equiv_cost;
        self.membership_comparisons += other.membership_comparisons;
        self.searches += other.searches;
    }

    /// `oracle_calls / classical_equiv_cost`, or NaN with no classical cost.
    pub fn ratio(&self) -> f64 {
        if self.classical_equiv_cost == 0 {
            f64::NAN
        } else {
            self.oracle_calls as f64 / self.classical_equiv_cost as f64
        }
    }
}
