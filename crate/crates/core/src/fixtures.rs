//! Reconstructed experimental runs shipped with the crate.
//!
//! The four Pb²⁺ runs are smooth first-order curves pinned to the reported
//! concentrations. The Methylene Blue run is generated from the exponential
//! model and is not a measurement. Each CSV has a Markdown sidecar in
//! `fixtures/` describing how it was built.

use std::path::PathBuf;

use crate::dataset::{parse_series, DatasetFile, DEFAULT_C0};
use crate::error::Result;
use crate::series::{Contaminant, ObservationSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixture {
    /// File name, e.g. `pcbc_run1.csv`.
    pub file_name: &'static str,
    pub contaminant: Contaminant,
    pub c0: f64,
    /// Expected removal fraction at the last sample.
    pub final_removal: f64,
    pub csv: &'static str,
}

impl Fixture {
    pub fn stem(&self) -> &'static str {
        self.file_name.trim_end_matches(".csv")
    }

    pub fn dataset(&self) -> DatasetFile {
        let mut f = DatasetFile::new(PathBuf::from(self.file_name), self.contaminant);
        f.c0 = self.c0;
        f
    }

    pub fn load(&self) -> Result<ObservationSeries> {
        Ok(parse_series(self.csv.as_bytes(), &self.dataset())?.series)
    }
}

pub const FIXTURES: [Fixture; 5] = [
    Fixture {
        file_name: "pcp_run1.csv",
        contaminant: Contaminant::Pb,
        c0: DEFAULT_C0,
        final_removal: 0.72,
        csv: include_str!("../fixtures/pcp_run1.csv"),
    },
    Fixture {
        file_name: "pcp_run2.csv",
        contaminant: Contaminant::Pb,
        c0: DEFAULT_C0,
        final_removal: 0.6302,
        csv: include_str!("../fixtures/pcp_run2.csv"),
    },
    Fixture {
        file_name: "pcbc_run1.csv",
        contaminant: Contaminant::Pb,
        c0: DEFAULT_C0,
        final_removal: 0.8694,
        csv: include_str!("../fixtures/pcbc_run1.csv"),
    },
    Fixture {
        file_name: "pcbc_run2.csv",
        contaminant: Contaminant::Pb,
        c0: DEFAULT_C0,
        final_removal: 0.8212,
        csv: include_str!("../fixtures/pcbc_run2.csv"),
    },
    Fixture {
        file_name: "mb_w1.csv",
        contaminant: Contaminant::MethyleneBlue,
        c0: DEFAULT_C0,
        final_removal: 0.985361,
        csv: include_str!("../fixtures/mb_w1.csv"),
    },
];

/// Looks a fixture up by file name or stem.
pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.file_name == name || f.stem() == name)
}
