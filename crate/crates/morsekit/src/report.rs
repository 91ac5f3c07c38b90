//! Per-instance report records: run the engine, compare against the
//! closed-form predictions, and compute homology where budgets allow.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::complex::{independence_complex_with_budget, Complex, ComplexError, Face};
use crate::graphs::{build_cycle, build_gmd, GraphError};
use crate::homology::{morse_homology, reduced_homology, HomologyError, HomologyProfile};
use crate::morse::{
    canonical_order, infer_wedge, morse_chain_complex, sequential_element_matching,
    verify_partial_matching, MorseError, WedgeInference,
};
use crate::theory::{
    bmask_labels, bmask_to_face, kozlov_predicted, predicted_critical_cells, predicted_homotopy,
    HomotopyPrediction, InstanceParams, TheoryError,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Vertex order used by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderChoice {
    /// `a_1 < ... < a_m < b_1 < ... < b_m`.
    Canonical,
    /// The canonical order reversed; useful for probing order sensitivity.
    Reverse,
}

impl OrderChoice {
    pub fn name(self) -> &'static str {
        match self {
            OrderChoice::Canonical => "canonical",
            OrderChoice::Reverse => "reverse",
        }
    }

    pub fn order(self, c: &Complex) -> Vec<usize> {
        let mut o = canonical_order(c);
        if self == OrderChoice::Reverse {
            o.reverse();
        }
        o
    }
}

/// Fault injection for harness self-tests: a deliberate corruption that must
/// make verification fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Replace the predicted critical cells with a rotated set.
    SwapPrediction,
}

/// Everything measured and checked on one `G_m^d` instance.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub m: usize,
    pub d: usize,
    pub face_count: usize,
    pub critical: Vec<Face>,
    pub predicted: Vec<Face>,
    pub predicted_homotopy: HomotopyPrediction,
    pub inference: WedgeInference,
    pub matching_ok: bool,
    pub acyclic_ok: bool,
    pub cells_ok: bool,
    pub wedge_ok: bool,
    pub euler_ok: bool,
    /// None when the instance exceeds the SNF budget.
    pub homology: Option<HomologyProfile>,
    pub homology_ok: Option<bool>,
    pub morse_agree_ok: Option<bool>,
    pub elapsed_ms: u128,
}

impl InstanceOutcome {
    /// "pass" only when every enabled check matched exactly.
    pub fn pass(&self) -> bool {
        self.matching_ok
            && self.acyclic_ok
            && self.cells_ok
            && self.wedge_ok
            && self.euler_ok
            && self.homology_ok.unwrap_or(true)
            && self.morse_agree_ok.unwrap_or(true)
    }

    pub fn to_json(&self, with_timing: bool) -> serde_json::Value {
        let critical: Vec<Vec<String>> = self
            .critical
            .iter()
            .map(|f| {
                f.vertices()
                    .map(|v| {
                        if v < self.m {
                            format!("a{}", v + 1)
                        } else {
                            format!("b{}", v - self.m + 1)
                        }
                    })
                    .collect()
            })
            .collect();
        let predicted: Vec<Vec<String>> = predicted_critical_cells(
            &InstanceParams::new(self.m, self.d).expect("validated on construction"),
        )
        .iter()
        .map(|&b| bmask_labels(b))
        .collect();
        let mut checks = BTreeMap::new();
        checks.insert("partial_matching", json!(self.matching_ok));
        checks.insert("acyclic", json!(self.acyclic_ok));
        checks.insert("critical_cells", json!(self.cells_ok));
        checks.insert("wedge_inference", json!(self.wedge_ok));
        checks.insert("euler", json!(self.euler_ok));
        checks.insert(
            "homology",
            self.homology_ok.map_or(json!("skipped"), |b| json!(b)),
        );
        checks.insert(
            "morse_vs_snf",
            self.morse_agree_ok.map_or(json!("skipped"), |b| json!(b)),
        );
        let mut obj = json!({
            "schema": SCHEMA_VERSION,
            "instance": {"family": "gmd", "m": self.m, "d": self.d},
            "face_count": self.face_count,
            "critical": critical,
            "critical_dims": self.critical.iter().map(|f| f.dim()).collect::<Vec<_>>(),
            "predicted": predicted,
            "predicted_homotopy": self.predicted_homotopy.to_string(),
            "inference": match &self.inference {
                WedgeInference::Wedge(h) => h.to_string(),
                WedgeInference::Indeterminate => "indeterminate".to_string(),
            },
            "homology": self.homology.as_ref().map(|h| h.to_json()),
            "checks": checks,
            "verdict": if self.pass() { "pass" } else { "fail" },
        });
        if with_timing {
            obj["timing_ms"] = json!(self.elapsed_ms);
        }
        obj
    }
}

/// Run the full pipeline on one `G_m^d` instance.
pub fn check_gmd_instance(
    m: usize,
    d: usize,
    order: OrderChoice,
    face_budget: usize,
    snf_budget: usize,
    fault: Option<Fault>,
) -> Result<InstanceOutcome, ReportError> {
    let start = std::time::Instant::now();
    let params = InstanceParams::new(m, d)?;
    let g = build_gmd(m, d)?;
    let c = independence_complex_with_budget(&g, face_budget)?;
    let mm = sequential_element_matching(&c, &order.order(&c))?;

    let matching_ok = verify_partial_matching(&mm, &c);
    let acyclic_ok = crate::morse::verify_acyclic(&mm, &c);

    let mut predicted: Vec<Face> = predicted_critical_cells(&params)
        .iter()
        .map(|&b| bmask_to_face(b, m))
        .collect();
    if fault == Some(Fault::SwapPrediction) {
        // Rotate each predicted cell one vertex to the left; guaranteed to
        // differ from the engine output on every instance.
        predicted = predicted.iter().map(|f| Face(f.0.rotate_left(1))).collect();
    }
    predicted.sort_unstable_by_key(|f| (f.card(), f.0));
    // Predictions are only asserted against the canonical order.
    let cells_ok = order != OrderChoice::Canonical || mm.critical() == predicted.as_slice();

    let expected_homotopy = predicted_homotopy(&params);
    let wedge_ok = match infer_wedge(&mm) {
        WedgeInference::Wedge(ref h) => *h == expected_homotopy,
        WedgeInference::Indeterminate => false,
    };
    let inference = infer_wedge(&mm);

    let expected_euler = if params.alpha == 0 { -(d as i64) } else { 1 };
    let euler_ok = c.reduced_euler() == expected_euler;

    let (homology, homology_ok, morse_agree_ok) = if c.face_count() <= snf_budget {
        let h = reduced_homology(&c, snf_budget)?;
        let h_ok = h.is_torsion_free() && h.nonzero_betti() == expected_homotopy.betti();
        let mcc = morse_chain_complex(&c, &mm)?;
        let hm = morse_homology(&mcc)?;
        let agree = hm.same_homology(&h);
        (Some(h), Some(h_ok), Some(agree))
    } else {
        (None, None, None)
    };

    Ok(InstanceOutcome {
        m,
        d,
        face_count: c.face_count(),
        critical: mm.critical().to_vec(),
        predicted,
        predicted_homotopy: expected_homotopy,
        inference,
        matching_ok,
        acyclic_ok,
        cells_ok,
        wedge_ok,
        euler_ok,
        homology,
        homology_ok,
        morse_agree_ok,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// Sweep all `1 <= d <= m <= m_max` in parallel; rows come back sorted by
/// `(m, d)` regardless of completion order.
pub fn sweep_gmd(
    m_max: usize,
    order: OrderChoice,
    face_budget: usize,
    snf_budget: usize,
    fault: Option<Fault>,
) -> Vec<(usize, usize, Result<InstanceOutcome, ReportError>)> {
    let mut instances = Vec::new();
    for m in 1..=m_max {
        for d in 1..=m {
            instances.push((m, d));
        }
    }
    let mut rows: Vec<_> = instances
        .par_iter()
        .map(|&(m, d)| {
            (
                m,
                d,
                check_gmd_instance(m, d, order, face_budget, snf_budget, fault),
            )
        })
        .collect();
    rows.sort_by_key(|&(m, d, _)| (m, d));
    rows
}

/// Result row for the cycle-family sweep against Kozlov's theorem.
#[derive(Debug, Clone)]
pub struct CycleOutcome {
    pub r: usize,
    pub face_count: usize,
    pub predicted: HomotopyPrediction,
    pub homology: HomologyProfile,
    pub homology_ok: bool,
}

impl CycleOutcome {
    pub fn pass(&self) -> bool {
        self.homology_ok
    }
}

pub fn check_cycle_instance(
    r: usize,
    face_budget: usize,
    snf_budget: usize,
) -> Result<CycleOutcome, ReportError> {
    let g = build_cycle(r)?;
    let c = independence_complex_with_budget(&g, face_budget)?;
    let predicted = kozlov_predicted(r)?;
    let homology = reduced_homology(&c, snf_budget)?;
    let homology_ok =
        homology.is_torsion_free() && homology.nonzero_betti() == predicted.betti();
    Ok(CycleOutcome {
        r,
        face_count: c.face_count(),
        predicted,
        homology,
        homology_ok,
    })
}
