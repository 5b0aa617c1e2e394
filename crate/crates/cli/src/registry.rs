use std::fmt;
use std::str::FromStr;

use crate::CliError;

/// Experiments known to the runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Fundamentals,
    Ehrenfest,
    Factorization,
    PropagationDecay,
    CauchyScan,
    DollardScan,
    Nonexistence,
    PhaseGrowth,
}

pub struct Entry {
    pub experiment: Experiment,
    pub anchor: &'static str,
    pub description: &'static str,
    pub outputs: &'static str,
}

const REGISTRY: [Entry; 8] = [
    Entry {
        experiment: Experiment::CauchyScan,
        anchor: "§2.1",
        description: "dyadic Cauchy scan of the reduced wave-operator approximant",
        outputs: "convergence.csv: t, diff, slope_window, floor",
    },
    Entry {
        experiment: Experiment::DollardScan,
        anchor: "§1.1",
        description: "Cauchy scan with the Dollard phase modifier",
        outputs: "convergence.csv: t, diff, slope_window, floor",
    },
    Entry {
        experiment: Experiment::Ehrenfest,
        anchor: "§1",
        description: "quantum expectations against the classical flow with V = 0",
        outputs: "ehrenfest.csv: t, x, x_classical, p, p_classical",
    },
    Entry {
        experiment: Experiment::Factorization,
        anchor: "§1",
        description: "residual of the lens-dilation factorization of the full propagator",
        outputs: "factorization.csv: t, residual",
    },
    Entry {
        experiment: Experiment::Fundamentals,
        anchor: "§1",
        description: "fundamental solutions, tail coefficients and Wronskian",
        outputs: "fundamentals.csv: t, z1, z1p, z2, z2p, wronskian",
    },
    Entry {
        experiment: Experiment::Nonexistence,
        anchor: "§3",
        description: "growth of the divergent phase integral I1 for long-range potentials",
        outputs: "phase_growth.csv: t, I1",
    },
    Entry {
        experiment: Experiment::PhaseGrowth,
        anchor: "§1.1",
        description: "growth of the unmodified Dollard phase at fixed momentum",
        outputs: "phase_growth.csv: t, alpha",
    },
    Entry {
        experiment: Experiment::PropagationDecay,
        anchor: "§2",
        description: "inner and outer cutoff norms of freely evolved annular states",
        outputs: "decay.csv: t, inner_mass, outer_mass, outer_in_grid, edge_mass",
    },
];

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Fundamentals,
        Experiment::Ehrenfest,
        Experiment::Factorization,
        Experiment::PropagationDecay,
        Experiment::CauchyScan,
        Experiment::DollardScan,
        Experiment::Nonexistence,
        Experiment::PhaseGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fundamentals => "fundamentals",
            Experiment::Ehrenfest => "ehrenfest",
            Experiment::Factorization => "factorization",
            Experiment::PropagationDecay => "propagation_decay",
            Experiment::CauchyScan => "cauchy_scan",
            Experiment::DollardScan => "dollard_scan",
            Experiment::Nonexistence => "nonexistence",
            Experiment::PhaseGrowth => "phase_growth",
        }
    }

    pub fn entry(self) -> &'static Entry {
        REGISTRY.iter().find(|e| e.experiment == self).expect("every experiment is registered")
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// Registry listing sorted by name, one experiment per line.
pub fn list_experiments() -> String {
    let mut entries: Vec<&Entry> = REGISTRY.iter().collect();
    entries.sort_by_key(|e| e.experiment.name());
    let width = entries.iter().map(|e| e.experiment.name().len()).max().unwrap_or(0);
    entries.iter().map(|e| format!("{:<width$}  {:<5} {}\n", e.experiment.name(), e.anchor, e.description)).collect()
}

/// CSV column documentation for `--help`.
pub fn output_help() -> String {
    let mut entries: Vec<&Entry> = REGISTRY.iter().collect();
    entries.sort_by_key(|e| e.experiment.name());
    entries.iter().map(|e| format!("  {:<18} {}\n", e.experiment.name(), e.outputs)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_sorted_and_anchored() {
        let list = list_experiments();
        let names: Vec<&str> = list.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 8);
        let line = list.lines().find(|l| l.starts_with("nonexistence")).unwrap();
        assert!(line.contains("§3"));
        assert_eq!(list, list_experiments());
    }

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }
}
