//! Manufactured cases, error norms and convergence orders.

mod cases;
mod norms;

use std::fmt::Write as _;

pub use cases::{
    case, case_with_frame, Branch, Ex5Frame, FitMode, ManufacturedCase, MeshKind, AIRFOIL_R,
    AIRFOIL_S, CASE_LABELS,
};
pub use norms::{error_norms, interface_error_norms, NormRow};

pub const CSV_HEADER: &str = "k,h,e_u,ord_u,e_q,ord_q,e_uhat,ord_uhat,e_ustar,ord_ustar";

/// Order between consecutive levels, `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`;
/// `None` for the first level and whenever an error vanishes or `h` repeats.
pub fn eoc(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; e.len().min(h.len())];
    for i in 1..out.len() {
        if e[i - 1] > 0.0 && e[i] > 0.0 && h[i - 1] != h[i] && h[i - 1] > 0.0 && h[i] > 0.0 {
            out[i] = Some((e[i - 1] / e[i]).ln() / (h[i - 1] / h[i]).ln());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub k: usize,
    pub rows: Vec<NormRow>,
}

impl ErrorReport {
    pub fn new(k: usize) -> Self {
        ErrorReport {
            k,
            rows: Vec::new(),
        }
    }

    fn column(&self, f: impl Fn(&NormRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn h(&self) -> Vec<f64> {
        self.column(|r| r.h)
    }

    pub fn orders_u(&self) -> Vec<Option<f64>> {
        eoc(&self.h(), &self.column(|r| r.e_u))
    }

    pub fn orders_q(&self) -> Vec<Option<f64>> {
        eoc(&self.h(), &self.column(|r| r.e_q))
    }

    pub fn orders_uhat(&self) -> Vec<Option<f64>> {
        eoc(&self.h(), &self.column(|r| r.e_uhat))
    }

    pub fn orders_ustar(&self) -> Vec<Option<f64>> {
        eoc(&self.h(), &self.column(|r| r.e_ustar))
    }

    /// CSV rows without the header.
    pub fn csv_rows(&self) -> String {
        let (ou, oq, oh, os) = (
            self.orders_u(),
            self.orders_q(),
            self.orders_uhat(),
            self.orders_ustar(),
        );
        let ord = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_default();
        let mut s = String::new();
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                s,
                "{},{:.6e},{:.6e},{},{:.6e},{},{:.6e},{},{:.6e},{}",
                self.k,
                r.h,
                r.e_u,
                ord(ou[i]),
                r.e_q,
                ord(oq[i]),
                r.e_uhat,
                ord(oh[i]),
                r.e_ustar,
                ord(os[i])
            )
            .unwrap();
        }
        s
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }
}
