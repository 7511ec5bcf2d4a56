//! Report documents. `generated_at` is the only field that varies between
//! identical runs; timings appear only when requested.

use serde::Serialize;
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::checks::{CheckId, CheckReport, CheckStatus};

pub const REPORT_SCHEMA: &str = "koszul-report/1";
pub const BETTI_SCHEMA: &str = "koszul-betti/1";
pub const AMPLENESS_SCHEMA: &str = "koszul-ampleness/1";
pub const BENCH_SCHEMA: &str = "koszul-rank-bench/1";

pub fn timestamp() -> String {
    OffsetDateTime::now_utc().format(&Rfc3339).unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub fail: usize,
    pub hypothesis_unmet: usize,
    pub budget_exceeded: usize,
    /// Failures of the sweep whose proof is only sketched, by report index.
    pub counterexamples: Vec<usize>,
}

impl Summary {
    pub fn of(reports: &[CheckReport]) -> Self {
        let mut s = Summary { total: reports.len(), ..Default::default() };
        for (i, r) in reports.iter().enumerate() {
            match r.status {
                CheckStatus::Pass => s.pass += 1,
                CheckStatus::Fail => s.fail += 1,
                CheckStatus::HypothesisUnmet => s.hypothesis_unmet += 1,
                CheckStatus::BudgetExceeded => s.budget_exceeded += 1,
            }
            if r.check == CheckId::Prop36Sweep && r.status == CheckStatus::Fail {
                s.counterexamples.push(i);
            }
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub generated_at: String,
    pub summary: Summary,
    pub reports: Vec<CheckReport>,
}

impl Report {
    pub fn new(reports: Vec<CheckReport>) -> Self {
        Report { schema: REPORT_SCHEMA, generated_at: timestamp(), summary: Summary::of(&reports), reports }
    }

    pub fn any_failed(&self) -> bool {
        self.summary.fail > 0
    }

    /// One row per report; `dims` joins the computed cell dimensions with `;`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = ["index", "check", "status", "curve_id", "prime", "seed", "b", "l", "p", "q", "cells", "dims"];
        w.write_record(header).expect("in-memory write");
        for (i, r) in self.reports.iter().enumerate() {
            let opt = |v: Option<i64>| v.map_or(String::new(), |v| v.to_string());
            let cells: Vec<String> = r.cells.iter().map(|c| format!("({},{})", c.p, c.q)).collect();
            let dims: Vec<String> = r.cells.iter().map(|c| c.dim.to_string()).collect();
            let check = serde_json::to_value(r.check).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            w.write_record([
                i.to_string(),
                check,
                status,
                r.curve_id.clone(),
                r.prime.to_string(),
                r.seed.to_string(),
                r.inputs.b.clone().unwrap_or_default(),
                r.inputs.l.clone().unwrap_or_default(),
                opt(r.inputs.p),
                opt(r.inputs.q),
                cells.join(";"),
                dims.join(";"),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }
}
