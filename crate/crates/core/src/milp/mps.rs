//! Fixed-format MPS writer and a whitespace-tokenised reader.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{Constraint, MilpModel, ObjSense, Provenance, Sense, VarKind};
use crate::error::{Error, Result};

const OBJ_ROW: &str = "OBJ";
const MAX_NAME: usize = 8;

/// MPS text plus the sidecar map from mangled to original names (empty when
/// every name fitted).
#[derive(Debug, Clone, PartialEq)]
pub struct MpsExport {
    pub text: String,
    pub name_map: BTreeMap<String, String>,
}

impl MpsExport {
    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.name_map).expect("string map serialises")
    }
}

fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if !(1e-5..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn needs_mangling<'a>(names: impl Iterator<Item = &'a str>, reserved: &[&str]) -> bool {
    names
        .into_iter()
        .any(|n| n.len() > MAX_NAME || reserved.contains(&n))
}

fn mangle(prefix: char, names: &[&str], map: &mut BTreeMap<String, String>) -> Vec<String> {
    if !needs_mangling(names.iter().copied(), &[OBJ_ROW, "MARKER", "RHS", "BND"]) {
        return names.iter().map(|s| s.to_string()).collect();
    }
    names
        .iter()
        .enumerate()
        .map(|(i, orig)| {
            let m = format!("{prefix}{:07}", i + 1);
            map.insert(m.clone(), orig.to_string());
            m
        })
        .collect()
}

fn line(out: &mut String, code: &str, f1: &str, f2: &str, f3: &str) {
    // Fixed-format field columns 2, 5, 15 and 25; longer values just overflow.
    let mut s = format!(" {code:<2} {f1:<8}  {f2:<8}  {f3}");
    while s.ends_with(' ') {
        s.pop();
    }
    out.push_str(&s);
    out.push('\n');
}

/// Writes `model` in fixed-format MPS.
pub fn export_mps(model: &MilpModel) -> MpsExport {
    let mut name_map = BTreeMap::new();
    let col_names: Vec<&str> = model.variables().iter().map(|v| v.name.as_str()).collect();
    let row_names: Vec<&str> = model.constraints().iter().map(|c| c.name.as_str()).collect();
    let cols = mangle('C', &col_names, &mut name_map);
    let rows = mangle('R', &row_names, &mut name_map);

    let prov = model.provenance();
    let mut out = String::new();
    if !prov.tag.is_empty() {
        let _ = writeln!(out, "* tag {}", prov.tag);
    }
    if !prov.fingerprint.is_empty() {
        let _ = writeln!(out, "* fingerprint {}", prov.fingerprint);
    }
    let _ = writeln!(out, "NAME          {}", if prov.tag.is_empty() { "MODEL" } else { &prov.tag });
    if model.sense() == ObjSense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }

    out.push_str("ROWS\n");
    line(&mut out, "N", OBJ_ROW, "", "");
    for (c, name) in model.constraints().iter().zip(&rows) {
        let code = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        line(&mut out, code, name, "", "");
    }

    // Column-major view of the rows.
    let n = model.variables().len();
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_col[j].push((i, a));
        }
    }
    let mut obj = vec![0.0; n];
    for &(j, c) in model.objective() {
        obj[j] = c;
    }

    out.push_str("COLUMNS\n");
    let mut in_marker = false;
    let mut marker_id = 0;
    for (j, v) in model.variables().iter().enumerate() {
        let wants_marker = v.kind == VarKind::Integer || (v.kind == VarKind::Binary && !(v.lower == 0.0 && v.upper == 1.0));
        if wants_marker != in_marker {
            let tag = if wants_marker { "'INTORG'" } else { "'INTEND'" };
            if wants_marker {
                marker_id += 1;
            }
            line(&mut out, "", &format!("M{marker_id:07}"), "'MARKER'", tag);
            in_marker = wants_marker;
        }
        let mut entries: Vec<(&str, f64)> = Vec::new();
        if obj[j] != 0.0 || by_col[j].is_empty() {
            entries.push((OBJ_ROW, obj[j]));
        }
        for &(i, a) in &by_col[j] {
            entries.push((&rows[i], a));
        }
        for &(r, a) in &entries {
            line(&mut out, "", &cols[j], r, &fmt_f64(a));
        }
    }
    if in_marker {
        line(&mut out, "", &format!("M{marker_id:07}"), "'MARKER'", "'INTEND'");
    }

    out.push_str("RHS\n");
    for (c, name) in model.constraints().iter().zip(&rows) {
        if c.rhs != 0.0 {
            line(&mut out, "", "RHS", name, &fmt_f64(c.rhs));
        }
    }
    out.push_str("RANGES\n");

    out.push_str("BOUNDS\n");
    for (v, name) in model.variables().iter().zip(&cols) {
        let (l, u) = (v.lower, v.upper);
        let binary = v.kind == VarKind::Binary && l == 0.0 && u == 1.0;
        if binary {
            line(&mut out, "BV", "BND", name, "");
        } else if l == u {
            line(&mut out, "FX", "BND", name, &fmt_f64(l));
        } else if l == f64::NEG_INFINITY && u == f64::INFINITY {
            line(&mut out, "FR", "BND", name, "");
        } else {
            if l == f64::NEG_INFINITY {
                line(&mut out, "MI", "BND", name, "");
            } else if l != 0.0 || v.kind.is_integer() {
                line(&mut out, "LO", "BND", name, &fmt_f64(l));
            }
            if u != f64::INFINITY {
                line(&mut out, "UP", "BND", name, &fmt_f64(u));
            } else if v.kind.is_integer() {
                line(&mut out, "PL", "BND", name, "");
            }
        }
    }
    out.push_str("ENDATA\n");
    MpsExport { text: out, name_map }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Head,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

struct ColSpec {
    name: String,
    integer: bool,
    entries: Vec<(String, f64)>,
    lower: f64,
    upper: f64,
    binary: bool,
}

fn mps_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Mps {
        line,
        message: msg.into(),
    }
}

fn num(line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| !x.is_nan())
        .ok_or_else(|| mps_err(line, format!("expected number, found `{tok}`")))
}

/// Reads MPS text; `name_map` (mangled to original) restores long names.
pub fn parse_mps(text: &str, name_map: Option<&BTreeMap<String, String>>) -> Result<MilpModel> {
    let restore = |s: &str| -> String {
        name_map
            .and_then(|m| m.get(s))
            .cloned()
            .unwrap_or_else(|| s.to_string())
    };
    let mut section = Section::Head;
    let mut prov = Provenance::default();
    let mut name_field: Option<String> = None;
    let mut sense = ObjSense::Minimize;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_idx: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<ColSpec> = Vec::new();
    let mut col_idx: HashMap<String, usize> = HashMap::new();
    let mut rhs: HashMap<usize, f64> = HashMap::new();
    let mut in_marker = false;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        if let Some(rest) = raw.strip_prefix('*') {
            let mut it = rest.split_whitespace();
            match (it.next(), it.next()) {
                (Some("tag"), Some(v)) => prov.tag = v.to_string(),
                (Some("fingerprint"), Some(v)) => prov.fingerprint = v.to_string(),
                _ => {}
            }
            continue;
        }
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if header {
            section = match toks[0] {
                "NAME" => {
                    name_field = toks.get(1).map(|s| s.to_string());
                    Section::Head
                }
                "OBJSENSE" => {
                    if let Some(s) = toks.get(1) {
                        sense = parse_sense(ln, s)?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(mps_err(ln, format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::Head | Section::End => return Err(mps_err(ln, "data outside a section")),
            Section::ObjSense => sense = parse_sense(ln, toks[0])?,
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(mps_err(ln, "ROWS entry needs a type and a name"));
                }
                let s = match toks[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(mps_err(ln, format!("unknown row type `{t}`"))),
                };
                if row_idx.insert(toks[1].to_string(), rows.len()).is_some() {
                    return Err(mps_err(ln, format!("duplicate row `{}`", toks[1])));
                }
                rows.push((toks[1].to_string(), s));
            }
            Section::Columns => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => in_marker = true,
                        "'INTEND'" => in_marker = false,
                        t => return Err(mps_err(ln, format!("unknown marker `{t}`"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(mps_err(ln, "COLUMNS entry needs one or two (row, value) pairs"));
                }
                let j = match col_idx.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        col_idx.insert(toks[0].to_string(), cols.len());
                        cols.push(ColSpec {
                            name: toks[0].to_string(),
                            integer: in_marker,
                            entries: Vec::new(),
                            lower: 0.0,
                            upper: f64::INFINITY,
                            binary: false,
                        });
                        cols.len() - 1
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let v = num(ln, pair[1])?;
                    cols[j].entries.push((pair[0].to_string(), v));
                }
            }
            Section::Rhs => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(mps_err(ln, "RHS entry needs one or two (row, value) pairs"));
                }
                for pair in toks[1..].chunks(2) {
                    let v = num(ln, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        if v != 0.0 {
                            return Err(mps_err(ln, "objective constants are not supported"));
                        }
                        continue;
                    }
                    let i = *row_idx
                        .get(pair[0])
                        .ok_or_else(|| mps_err(ln, format!("RHS for unknown row `{}`", pair[0])))?;
                    rhs.insert(i, v);
                }
            }
            Section::Ranges => return Err(mps_err(ln, "RANGES entries are not supported")),
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(mps_err(ln, "BOUNDS entry needs a type, a set name and a column"));
                }
                let j = *col_idx
                    .get(toks[2])
                    .ok_or_else(|| mps_err(ln, format!("bound on unknown column `{}`", toks[2])))?;
                let val = || -> Result<f64> {
                    toks.get(3)
                        .ok_or_else(|| mps_err(ln, "missing bound value"))
                        .and_then(|t| num(ln, t))
                };
                let c = &mut cols[j];
                match toks[0] {
                    "UP" => c.upper = val()?,
                    "LO" => c.lower = val()?,
                    "FX" => {
                        let v = val()?;
                        c.lower = v;
                        c.upper = v;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "PL" => c.upper = f64::INFINITY,
                    "BV" => {
                        c.binary = true;
                        c.lower = 0.0;
                        c.upper = 1.0;
                    }
                    "LI" => {
                        c.integer = true;
                        c.lower = val()?;
                    }
                    "UI" => {
                        c.integer = true;
                        c.upper = val()?;
                    }
                    t => return Err(mps_err(ln, format!("unknown bound type `{t}`"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(mps_err(text.lines().count(), "missing ENDATA"));
    }
    if prov.tag.is_empty() {
        if let Some(n) = name_field.filter(|n| n != "MODEL") {
            prov.tag = n;
        }
    }

    let mut model = MilpModel::new();
    model.set_provenance(prov);
    let obj_name = obj_row.unwrap_or_else(|| OBJ_ROW.to_string());
    let mut row_coeffs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    let mut objective = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let kind = if c.binary {
            VarKind::Binary
        } else if c.integer {
            VarKind::Integer
        } else {
            VarKind::Continuous
        };
        let id = model.add_variable(restore(&c.name), c.lower, c.upper, kind)?;
        debug_assert_eq!(id, j);
        for (r, a) in &c.entries {
            if *r == obj_name {
                objective.push((j, *a));
            } else {
                let i = *row_idx
                    .get(r)
                    .ok_or_else(|| mps_err(0, format!("column `{}` uses unknown row `{r}`", c.name)))?;
                row_coeffs[i].push((j, *a));
            }
        }
    }
    for (i, ((name, s), coeffs)) in rows.into_iter().zip(row_coeffs).enumerate() {
        let b = rhs.get(&i).copied().unwrap_or(0.0);
        model.push_constraint(Constraint::new(restore(&name), coeffs, s, b))?;
    }
    model.set_objective(sense, objective)?;
    Ok(model)
}

fn parse_sense(ln: usize, s: &str) -> Result<ObjSense> {
    match s {
        "MAX" | "MAXIMIZE" => Ok(ObjSense::Maximize),
        "MIN" | "MINIMIZE" => Ok(ObjSense::Minimize),
        t => Err(mps_err(ln, format!("unknown objective sense `{t}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MilpModel {
        let mut m = MilpModel::with_provenance("SAMPLE", "00ff");
        let x = m.add_integer("x", 0.0, 2.0).unwrap();
        let y = m.add_binary("y").unwrap();
        let z = m.add_continuous("z", f64::NEG_INFINITY, 3.5).unwrap();
        let w = m.add_continuous("w", -1.0, -1.0).unwrap();
        m.add_constraint("c1", vec![(x, 1.0), (y, -2.0)], Sense::Le, 1.0).unwrap();
        m.add_constraint("c2", vec![(z, 0.25), (w, 1.0)], Sense::Eq, 0.0).unwrap();
        m.add_constraint("c3", vec![(x, 1.0), (z, 1e-9)], Sense::Ge, -3.0).unwrap();
        m.set_objective(ObjSense::Maximize, vec![(x, 1.0), (y, 0.1)]).unwrap();
        m
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample();
        let e = export_mps(&m);
        assert!(e.name_map.is_empty());
        let back = parse_mps(&e.text, None).unwrap();
        assert_eq!(back, m);
        assert_eq!(export_mps(&back).text, e.text);
    }

    #[test]
    fn long_names_are_mangled_and_restored() {
        let mut m = MilpModel::new();
        let a = m.add_binary("x_arc_12_13").unwrap();
        m.add_binary("b").unwrap();
        m.add_constraint("a_rather_long_row", vec![(a, 1.0)], Sense::Le, 1.0).unwrap();
        m.set_objective(ObjSense::Minimize, vec![(a, 2.0)]).unwrap();
        let e = export_mps(&m);
        assert!(e.text.contains("C0000001"));
        assert!(e.text.contains("R0000001"));
        assert_eq!(e.name_map["C0000001"], "x_arc_12_13");
        let back = parse_mps(&e.text, Some(&e.name_map)).unwrap();
        assert_eq!(back, m);
        let raw = parse_mps(&e.text, None).unwrap();
        assert_eq!(export_mps(&raw).text, e.text);
    }

    #[test]
    fn malformed_input_is_reported() {
        assert!(parse_mps("NAME X\nROWS\n N OBJ\nCOLUMNS\n x OBJ abc\nENDATA\n", None).is_err());
        assert!(parse_mps("NAME X\nROWS\n N OBJ\n", None).is_err());
    }
}
