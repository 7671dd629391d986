//! Named verification suites with machine-readable reports.

use serde::Serialize;
use serde_json::{json, Value};

use vanishing_core::am::localization_compare;
use vanishing_core::cobar::{CobarComplex, ExtTable};
use vanishing_core::oracle::{vanish, FieldClass, Localization, StemTable};
use vanishing_core::slice::{region_e2_columns, Window};

use crate::CliError;

pub const SUITES: [&str; 5] = ["cobar-axioms", "vanishing-lines", "am-window", "region-columns", "oracle-regions"];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: &str, checks: Vec<Check>) -> Report {
        Report {
            suite: suite.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

fn check(name: impl Into<String>, pass: bool, detail: Value) -> Check {
    Check {
        name: name.into(),
        pass,
        detail,
    }
}

/// `d∘d = 0` exactly, checked on the composite matrices out of every
/// `C^s`, `s ≤ s_max`, `t ≤ t_max`.
pub fn cobar_axioms(windows: &[(u64, usize, u32)]) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    for &(p, s_max, t_max) in windows {
        let complex = CobarComplex::new(p, t_max)?;
        let mut failures = Vec::new();
        let mut compositions = 0usize;
        for t in 0..=t_max {
            let column = complex.column(s_max + 2, t)?;
            for s in 0..=s_max {
                compositions += 1;
                if let Err(e) = column.check_d_squared(s) {
                    failures.push(e.to_string());
                }
            }
        }
        checks.push(check(
            format!("d∘d = 0 at p={p}, s≤{s_max}, t≤{t_max}"),
            failures.is_empty(),
            json!({"prime": p, "s_max": s_max, "t_max": t_max, "compositions": compositions, "failures": failures}),
        ));
    }
    Ok(Report::new("cobar-axioms", checks))
}

/// Zero below `t = 2s(p-1)` for `s > 0`, zero in odd `t`, finite away
/// from `(0, 0)`.
pub fn vanishing_lines(tables: &[ExtTable]) -> Report {
    let mut checks = Vec::new();
    for table in tables {
        let p = table.prime;
        let mut below = Vec::new();
        let mut odd = Vec::new();
        let mut infinite = Vec::new();
        for ((s, t), g) in table.entries() {
            if s > 0 && (t as u64) < 2 * s as u64 * (p - 1) && !g.is_trivial() {
                below.push(format!("({s},{t}): {g}"));
            }
            if t % 2 == 1 && !g.is_trivial() {
                odd.push(format!("({s},{t}): {g}"));
            }
            if (s, t) != (0, 0) && !g.is_finite() {
                infinite.push(format!("({s},{t}): {g}"));
            }
        }
        let window = json!({"prime": p, "s_max": table.s_max, "t_max": table.t_max});
        checks.push(check(format!("p={p}: zero below t = 2s(p-1)"), below.is_empty(), json!({"window": window, "violations": below})));
        checks.push(check(format!("p={p}: zero in odd t"), odd.is_empty(), json!({"window": window, "violations": odd})));
        checks.push(check(format!("p={p}: finite off (0,0)"), infinite.is_empty(), json!({"window": window, "violations": infinite})));
    }
    Report::new("vanishing-lines", checks)
}

/// Computed `E2` against the localized ring inside the iso range.
pub fn am_window(table: &ExtTable, t_limit: u32) -> Result<Report, CliError> {
    let rows = localization_compare(table, t_limit)?;
    let checks = rows
        .iter()
        .map(|r| {
            check(
                format!("({},{})", r.s, r.t),
                r.pass,
                serde_json::to_value(r).expect("row serializes"),
            )
        })
        .collect();
    Ok(Report::new("am-window", checks))
}

pub fn region_columns(window: Window) -> Report {
    let checks = match region_e2_columns(&window) {
        Ok(r) => vec![check(
            format!("survivors in m ∈ [{}, {}] lie in columns m ≡ 0, 3 (mod 4)", window.m_min, window.m_max),
            r.residues.iter().all(|x| *x == 0 || *x == 3),
            json!({
                "window": window,
                "survivors": r.survivors.len(),
                "removed": r.removed.len(),
                "residues": r.residues,
                "warnings": r.warnings,
            }),
        )],
        Err(e) => vec![check("column concentration", false, json!({"error": e.to_string()}))],
    };
    Report::new("region-columns", checks)
}

fn field_classes() -> Vec<FieldClass> {
    vec![
        FieldClass::EtaComplete { q: 1 },
        FieldClass::EtaComplete { q: 3 },
        FieldClass::NonrealChar0,
        FieldClass::PositiveCharPerfectFiniteCd { q: 5 },
        FieldClass::FormallyReal,
        FieldClass::Unspecified,
    ]
}

fn localizations(field: FieldClass) -> Vec<Localization> {
    let q = field.exponential_characteristic();
    let mut out = vec![Localization::Integral];
    out.extend([3u64, 5, 7].into_iter().filter(|p| *p != q).map(|p| Localization::PLocal { p }));
    out
}

/// Inequalities written out independently of the oracle.
fn raw_region(field: FieldClass, loc: Localization, stems: &StemTable, m: i64, n: i64) -> bool {
    let am = m > 0 && (m % 4 == 1 || m % 4 == 2) && 2 * n > 3 * m + 5 && 2 * n > 4 * m;
    let local = |p: u64| m >= 0 && (p as i64 - 2) * n > (p as i64 - 1) * m;
    let region = match loc {
        Localization::Integral => m < 0 || am,
        Localization::PLocal { p } => m < 0 || local(p),
    };
    match field {
        FieldClass::Unspecified => m < 0,
        FieldClass::FormallyReal => {
            if m < 0 {
                return true;
            }
            if m == 0 {
                return false;
            }
            let Some(entry) = stems.get(m) else { return false };
            let stem_ok = match loc {
                Localization::Integral => entry.group.odd_part_trivial(),
                Localization::PLocal { p } => entry.group.p_part_trivial(p),
            };
            region && stem_ok
        }
        _ => region,
    }
}

/// Upward closure in `n`, nesting of the formally real answers inside the
/// η-complete ones, the exact `p = 3` region, and soundness against
/// [`raw_region`] on `|m| ≤ m_bound`, `|n| ≤ n_bound`.
pub fn oracle_regions(stems: &StemTable, m_bound: i64, n_bound: i64) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    let mut points = 0usize;
    let mut closure = Vec::new();
    let mut soundness = Vec::new();
    let mut nesting = Vec::new();
    let mut traces = Vec::new();
    for field in field_classes() {
        for loc in localizations(field) {
            for m in -m_bound..=m_bound {
                let mut previous = false;
                for n in -n_bound..=n_bound {
                    points += 1;
                    let v = vanish(m, n, field, loc, stems)?;
                    let yes = v.vanishes();
                    if previous && !yes {
                        closure.push(format!("{field:?} {loc:?} ({m},{}) → ({m},{n})", n - 1));
                    }
                    previous = yes;
                    if yes && !raw_region(field, loc, stems, m, n) {
                        soundness.push(format!("{field:?} {loc:?} ({m},{n})"));
                    }
                    if yes && v.trace.is_empty() {
                        traces.push(format!("{field:?} {loc:?} ({m},{n})"));
                    }
                    if field == FieldClass::FormallyReal && m > 0 && yes {
                        let eta = vanish(m, n, FieldClass::EtaComplete { q: 1 }, loc, stems)?;
                        if !eta.vanishes() {
                            nesting.push(format!("{loc:?} ({m},{n})"));
                        }
                    }
                }
            }
        }
    }
    let mut p3 = Vec::new();
    for m in -m_bound..=m_bound {
        for n in -n_bound..=n_bound {
            let v = vanish(m, n, FieldClass::EtaComplete { q: 1 }, Localization::PLocal { p: 3 }, stems)?;
            if v.vanishes() != (m < 0 || n > 2 * m) {
                p3.push(format!("({m},{n})"));
            }
        }
    }
    let window = json!({"m_bound": m_bound, "n_bound": n_bound, "points": points});
    let sample = |v: &Vec<String>| v.iter().take(20).cloned().collect::<Vec<_>>();
    checks.push(check("upward closure in n", closure.is_empty(), json!({"window": window, "violations": closure.len(), "sample": sample(&closure)})));
    checks.push(check("never vanishes outside the stated regions", soundness.is_empty(), json!({"window": window, "violations": soundness.len(), "sample": sample(&soundness)})));
    checks.push(check("formally real implies eta-complete for m > 0", nesting.is_empty(), json!({"violations": nesting.len(), "sample": sample(&nesting)})));
    checks.push(check("Vanishes always carries a trace", traces.is_empty(), json!({"violations": traces.len()})));
    checks.push(check("p = 3 region is {m < 0} ∪ {n > 2m}", p3.is_empty(), json!({"violations": p3.len(), "sample": sample(&p3)})));
    Ok(Report::new("oracle-regions", checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use vanishing_core::cobar::ext_table;

    #[test]
    fn small_suites_pass() {
        assert!(cobar_axioms(&[(2, 3, 10)]).unwrap().pass);
        assert!(vanishing_lines(&[ext_table(3, 3, 16).unwrap()]).pass);
        assert!(region_columns(Window { m_min: 0, m_max: 12, n_min: 0, n_max: 30 }).pass);
        assert!(oracle_regions(&StemTable::seed(), 8, 20).unwrap().pass);
    }

    #[test]
    fn raw_region_reference_points() {
        let stems = StemTable::seed();
        assert!(raw_region(FieldClass::FormallyReal, Localization::Integral, &stems, 18, 37));
        assert!(!raw_region(FieldClass::FormallyReal, Localization::Integral, &stems, 18, 36));
        assert!(raw_region(FieldClass::NonrealChar0, Localization::PLocal { p: 3 }, &stems, 2, 5));
        assert!(!raw_region(FieldClass::Unspecified, Localization::Integral, &stems, 0, 5));
    }
}
