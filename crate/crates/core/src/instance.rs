//! Symmetric TSP instances: TSPLIB parsing, unit-weight complete graphs and
//! optimum descriptions.

use std::fmt::Write as _;

use crate::error::{EdoError, Result};
use crate::tour::Tour;

/// Smallest instance a 2-opt move can act on (two non-adjacent edges).
pub const MIN_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Euclidean2d,
    Explicit,
    Unit,
}

/// A symmetric TSP instance with a dense distance matrix.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    n: usize,
    dist: Vec<f64>,
    kind: InstanceKind,
    coords: Option<Vec<(f64, f64)>>,
}

impl Instance {
    /// Builds an instance from a full row-major matrix, checking symmetry,
    /// a zero diagonal and strictly positive off-diagonal weights.
    pub fn from_matrix(
        name: impl Into<String>,
        n: usize,
        dist: Vec<f64>,
        kind: InstanceKind,
    ) -> Result<Self> {
        if n < MIN_NODES {
            return Err(EdoError::Argument(format!(
                "instance needs at least {MIN_NODES} nodes, got {n}"
            )));
        }
        if dist.len() != n * n {
            return Err(EdoError::Argument(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(EdoError::Validation(format!(
                    "d({i},{i}) = {} but the diagonal must be zero",
                    dist[i * n + i]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (dist[i * n + j], dist[j * n + i]);
                if a != b {
                    return Err(EdoError::Validation(format!(
                        "matrix is not symmetric: d({i},{j}) = {a} but d({j},{i}) = {b}"
                    )));
                }
                if !(a > 0.0) || !a.is_finite() {
                    return Err(EdoError::Validation(format!(
                        "d({i},{j}) = {a}; off-diagonal weights must be positive"
                    )));
                }
            }
        }
        Ok(Instance {
            name: name.into(),
            n,
            dist,
            kind,
            coords: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    /// Serialises the instance as an EXPLICIT / FULL_MATRIX TSPLIB file.
    pub fn to_tsplib_explicit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : TSP");
        let _ = writeln!(out, "DIMENSION : {}", self.n);
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EXPLICIT");
        let _ = writeln!(out, "EDGE_WEIGHT_FORMAT : FULL_MATRIX");
        let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format_weight(self.dist(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out.push_str("EOF\n");
        out
    }
}

fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{}", w as i64)
    } else {
        // Shortest representation that parses back to the same f64.
        format!("{w:?}")
    }
}

/// Complete graph on `n` nodes with every edge weighing one.
pub fn unit_graph(n: usize) -> Result<Instance> {
    if n < MIN_NODES {
        return Err(EdoError::Argument(format!(
            "unit graph needs at least {MIN_NODES} nodes, got {n}"
        )));
    }
    let mut dist = vec![1.0; n * n];
    for i in 0..n {
        dist[i * n + i] = 0.0;
    }
    Instance::from_matrix(format!("unit{n}"), n, dist, InstanceKind::Unit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightType {
    Euc2d,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

/// Parses a symmetric TSPLIB instance (`EUC_2D` or `EXPLICIT`).
pub fn parse_tsplib(text: &str) -> Result<Instance> {
    let mut name = String::from("unnamed");
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<WeightType> = None;
    let mut weight_format: Option<WeightFormat> = None;
    let mut coords: Option<Vec<(f64, f64)>> = None;
    let mut weights: Option<(usize, Vec<f64>)> = None;

    let lines: Vec<&str> = text.lines().collect();
    let mut idx = 0;
    while idx < lines.len() {
        let lineno = idx + 1;
        let line = lines[idx].trim();
        idx += 1;
        if line.is_empty() {
            continue;
        }
        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim().to_ascii_uppercase(), v.trim()),
            None => (line.to_ascii_uppercase(), ""),
        };
        match key.as_str() {
            "NAME" => name = value.to_string(),
            "COMMENT" => {}
            "TYPE" => {
                if !value.eq_ignore_ascii_case("TSP") {
                    return Err(EdoError::Unsupported(format!(
                        "TYPE {value} (line {lineno}); only symmetric TSP is supported"
                    )));
                }
            }
            "DIMENSION" => {
                let d = value
                    .parse::<usize>()
                    .map_err(|_| EdoError::parse(lineno, format!("bad DIMENSION '{value}'")))?;
                dimension = Some(d);
            }
            "EDGE_WEIGHT_TYPE" => {
                weight_type = Some(match value.to_ascii_uppercase().as_str() {
                    "EUC_2D" => WeightType::Euc2d,
                    "EXPLICIT" => WeightType::Explicit,
                    other => {
                        return Err(EdoError::Unsupported(format!(
                            "EDGE_WEIGHT_TYPE {other} (line {lineno})"
                        )))
                    }
                })
            }
            "EDGE_WEIGHT_FORMAT" => {
                weight_format = Some(match value.to_ascii_uppercase().as_str() {
                    "FULL_MATRIX" => WeightFormat::FullMatrix,
                    "UPPER_ROW" => WeightFormat::UpperRow,
                    "LOWER_ROW" => WeightFormat::LowerRow,
                    "UPPER_DIAG_ROW" => WeightFormat::UpperDiagRow,
                    "LOWER_DIAG_ROW" => WeightFormat::LowerDiagRow,
                    other => {
                        return Err(EdoError::Unsupported(format!(
                            "EDGE_WEIGHT_FORMAT {other} (line {lineno})"
                        )))
                    }
                })
            }
            "NODE_COORD_TYPE" | "DISPLAY_DATA_TYPE" => {}
            "NODE_COORD_SECTION" => {
                let n = dimension
                    .ok_or_else(|| EdoError::parse(lineno, "NODE_COORD_SECTION before DIMENSION"))?;
                let mut pts = vec![None; n];
                for _ in 0..n {
                    let (ln, row) = next_data_line(&lines, &mut idx)
                        .ok_or_else(|| EdoError::parse(lines.len(), "NODE_COORD_SECTION truncated"))?;
                    let fields: Vec<&str> = row.split_whitespace().collect();
                    if fields.len() < 3 {
                        return Err(EdoError::parse(ln, "expected '<id> <x> <y>'"));
                    }
                    let id: usize = fields[0]
                        .parse()
                        .map_err(|_| EdoError::parse(ln, format!("bad node id '{}'", fields[0])))?;
                    if id == 0 || id > n {
                        return Err(EdoError::parse(ln, format!("node id {id} outside 1..={n}")));
                    }
                    let x = parse_f64(fields[1], ln)?;
                    let y = parse_f64(fields[2], ln)?;
                    if pts[id - 1].replace((x, y)).is_some() {
                        return Err(EdoError::parse(ln, format!("node {id} listed twice")));
                    }
                }
                let pts: Vec<(f64, f64)> = pts
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| EdoError::parse(lineno, "missing node coordinates"))?;
                coords = Some(pts);
            }
            "EDGE_WEIGHT_SECTION" => {
                let n = dimension
                    .ok_or_else(|| EdoError::parse(lineno, "EDGE_WEIGHT_SECTION before DIMENSION"))?;
                let format = weight_format.ok_or_else(|| {
                    EdoError::parse(lineno, "EDGE_WEIGHT_SECTION without EDGE_WEIGHT_FORMAT")
                })?;
                let expected = match format {
                    WeightFormat::FullMatrix => n * n,
                    WeightFormat::UpperRow | WeightFormat::LowerRow => n * (n - 1) / 2,
                    WeightFormat::UpperDiagRow | WeightFormat::LowerDiagRow => n * (n + 1) / 2,
                };
                let mut values = Vec::with_capacity(expected);
                while values.len() < expected {
                    let (ln, row) = next_data_line(&lines, &mut idx).ok_or_else(|| {
                        EdoError::parse(
                            lines.len(),
                            format!("EDGE_WEIGHT_SECTION has {} of {expected} weights", values.len()),
                        )
                    })?;
                    for tok in row.split_whitespace() {
                        if values.len() == expected {
                            return Err(EdoError::parse(ln, "too many weights in EDGE_WEIGHT_SECTION"));
                        }
                        values.push(parse_f64(tok, ln)?);
                    }
                }
                weights = Some((lineno, values));
            }
            "DISPLAY_DATA_SECTION" => {
                // Coordinates for drawing only; skip n lines.
                let n = dimension.unwrap_or(0);
                for _ in 0..n {
                    let _ = next_data_line(&lines, &mut idx);
                }
            }
            "EOF" => break,
            _ => {
                return Err(EdoError::parse(lineno, format!("unknown header field '{key}'")));
            }
        }
    }

    let n = dimension.ok_or_else(|| EdoError::parse(0, "missing DIMENSION"))?;
    if n < MIN_NODES {
        return Err(EdoError::Argument(format!(
            "instance {name} has {n} nodes; at least {MIN_NODES} are required"
        )));
    }
    match weight_type.ok_or_else(|| EdoError::parse(0, "missing EDGE_WEIGHT_TYPE"))? {
        WeightType::Euc2d => {
            let pts = coords.ok_or_else(|| EdoError::parse(0, "EUC_2D instance without NODE_COORD_SECTION"))?;
            let mut dist = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        dist[i * n + j] = euc_2d(pts[i], pts[j]);
                    }
                }
            }
            let mut inst = Instance::from_matrix(name, n, dist, InstanceKind::Euclidean2d)?;
            inst.coords = Some(pts);
            Ok(inst)
        }
        WeightType::Explicit => {
            let (line, values) =
                weights.ok_or_else(|| EdoError::parse(0, "EXPLICIT instance without EDGE_WEIGHT_SECTION"))?;
            let format = weight_format.expect("checked when the section was read");
            let dist = expand_matrix(n, format, &values, line)?;
            let mut inst = Instance::from_matrix(name, n, dist, InstanceKind::Explicit)?;
            inst.coords = coords;
            Ok(inst)
        }
    }
}

/// TSPLIB `nint` rounding of the Euclidean norm.
fn euc_2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    ((dx * dx + dy * dy).sqrt() + 0.5).floor()
}

fn expand_matrix(n: usize, format: WeightFormat, values: &[f64], line: usize) -> Result<Vec<f64>> {
    let mut dist = vec![0.0; n * n];
    let mut it = values.iter().copied();
    let mut put = |i: usize, j: usize, v: f64| {
        dist[i * n + j] = v;
        dist[j * n + i] = v;
    };
    match format {
        WeightFormat::FullMatrix => {
            let mut full = vec![0.0; n * n];
            full.copy_from_slice(values);
            for i in 0..n {
                for j in (i + 1)..n {
                    if full[i * n + j] != full[j * n + i] {
                        return Err(EdoError::Validation(format!(
                            "EDGE_WEIGHT_SECTION (line {line}) is not symmetric: d({},{}) = {} but d({},{}) = {}",
                            i + 1,
                            j + 1,
                            full[i * n + j],
                            j + 1,
                            i + 1,
                            full[j * n + i]
                        )));
                    }
                }
            }
            return Ok(full);
        }
        WeightFormat::UpperRow => {
            for i in 0..n {
                for j in (i + 1)..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        WeightFormat::LowerRow => {
            for i in 0..n {
                for j in 0..i {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        WeightFormat::UpperDiagRow => {
            for i in 0..n {
                for j in i..n {
                    put(i, j, it.next().unwrap());
                }
            }
        }
        WeightFormat::LowerDiagRow => {
            for i in 0..n {
                for j in 0..=i {
                    put(i, j, it.next().unwrap());
                }
            }
        }
    }
    Ok(dist)
}

fn next_data_line<'a>(lines: &[&'a str], idx: &mut usize) -> Option<(usize, &'a str)> {
    while *idx < lines.len() {
        let line = lines[*idx].trim();
        *idx += 1;
        if !line.is_empty() {
            return Some((*idx, line));
        }
    }
    None
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| EdoError::parse(line, format!("bad number '{tok}'")))
}

/// Cost of an optimal tour, optionally together with the tour itself.
#[derive(Debug, Clone)]
pub struct OptimumInfo {
    opt_cost: f64,
    opt_tour: Option<Tour>,
}

impl OptimumInfo {
    pub fn new(opt_cost: f64, opt_tour: Option<Tour>) -> Result<Self> {
        if !(opt_cost > 0.0) || !opt_cost.is_finite() {
            return Err(EdoError::Validation(format!(
                "optimum cost must be positive, got {opt_cost}"
            )));
        }
        if let Some(t) = &opt_tour {
            let rel = (t.cost() - opt_cost).abs() / opt_cost;
            if rel > 1e-6 {
                return Err(EdoError::Validation(format!(
                    "optimal tour costs {} but the stated optimum is {opt_cost}",
                    t.cost()
                )));
            }
        }
        Ok(OptimumInfo { opt_cost, opt_tour })
    }

    pub fn from_tour(tour: Tour) -> Self {
        OptimumInfo {
            opt_cost: tour.cost(),
            opt_tour: Some(tour),
        }
    }

    pub fn opt_cost(&self) -> f64 {
        self.opt_cost
    }

    pub fn opt_tour(&self) -> Option<&Tour> {
        self.opt_tour.as_ref()
    }
}

/// Reads either a TSPLIB `.tour` file or a bare optimum cost.
pub fn parse_opt_tour(text: &str, inst: &Instance) -> Result<OptimumInfo> {
    let trimmed = text.trim();
    if let Ok(cost) = trimmed.parse::<f64>() {
        return OptimumInfo::new(cost, None);
    }

    let lines: Vec<&str> = text.lines().collect();
    let mut idx = 0;
    let mut nodes: Option<Vec<usize>> = None;
    while idx < lines.len() {
        let lineno = idx + 1;
        let line = lines[idx].trim();
        idx += 1;
        if line.is_empty() {
            continue;
        }
        let key = line
            .split_once(':')
            .map_or(line, |(k, _)| k)
            .trim()
            .to_ascii_uppercase();
        match key.as_str() {
            "NAME" | "COMMENT" | "TYPE" => {}
            "DIMENSION" => {
                let value = line.split_once(':').map_or("", |(_, v)| v.trim());
                let d: usize = value
                    .parse()
                    .map_err(|_| EdoError::parse(lineno, format!("bad DIMENSION '{value}'")))?;
                if d != inst.n() {
                    return Err(EdoError::Validation(format!(
                        "tour DIMENSION {d} does not match instance size {}",
                        inst.n()
                    )));
                }
            }
            "TOUR_SECTION" => {
                let mut ids = Vec::with_capacity(inst.n());
                'outer: while idx < lines.len() {
                    let ln = idx + 1;
                    let row = lines[idx].trim();
                    idx += 1;
                    for tok in row.split_whitespace() {
                        if tok.eq_ignore_ascii_case("EOF") {
                            break 'outer;
                        }
                        let v: i64 = tok
                            .parse()
                            .map_err(|_| EdoError::parse(ln, format!("bad node id '{tok}'")))?;
                        if v == -1 {
                            break 'outer;
                        }
                        if v < 1 || v as usize > inst.n() {
                            return Err(EdoError::Validation(format!(
                                "tour node {v} (line {ln}) outside 1..={}",
                                inst.n()
                            )));
                        }
                        ids.push(v as usize - 1);
                    }
                }
                nodes = Some(ids);
            }
            "EOF" => break,
            _ => return Err(EdoError::parse(lineno, format!("unknown tour field '{key}'"))),
        }
    }
    let perm = nodes.ok_or_else(|| EdoError::parse(0, "no TOUR_SECTION and not a plain cost"))?;
    let tour = Tour::new(perm, inst)?;
    Ok(OptimumInfo::from_tour(tour))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_EUC: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\n3 6 0\n4 3 -4\nEOF\n";

    #[test]
    fn euc_2d_uses_nint() {
        let inst = parse_tsplib(TINY_EUC).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.dist(0, 1), 5.0);
        assert_eq!(inst.dist(0, 2), 6.0);
        assert_eq!(inst.kind(), InstanceKind::Euclidean2d);
        assert_eq!(euc_2d((0.0, 0.0), (1.0, 1.0)), 1.0);
        assert_eq!(euc_2d((0.0, 0.0), (1.5, 1.5)), 2.0);
    }

    #[test]
    fn two_nodes_rejected() {
        let text = "NAME : two\nTYPE : TSP\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nEOF\n";
        assert!(matches!(parse_tsplib(text), Err(EdoError::Argument(_))));
    }

    #[test]
    fn asymmetric_full_matrix_rejected() {
        let text = "NAME : asym\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2 3\n9 0 4 5\n2 4 0 6\n3 5 6 0\nEOF\n";
        let err = parse_tsplib(text).unwrap_err();
        assert!(matches!(err, EdoError::Validation(_)), "{err}");
        assert!(err.to_string().contains("not symmetric"));
    }

    #[test]
    fn explicit_formats_agree() {
        let full = "NAME : m\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : FULL_MATRIX\nEDGE_WEIGHT_SECTION\n0 1 2 3\n1 0 4 5\n2 4 0 6\n3 5 6 0\nEOF\n";
        let upper = "NAME : m\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 2 3\n4 5\n6\nEOF\n";
        let lower = "NAME : m\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : LOWER_DIAG_ROW\nEDGE_WEIGHT_SECTION\n0\n1 0\n2 4 0\n3 5 6 0\nEOF\n";
        let a = parse_tsplib(full).unwrap();
        let b = parse_tsplib(upper).unwrap();
        let c = parse_tsplib(lower).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.dist(i, j), b.dist(i, j));
                assert_eq!(a.dist(i, j), c.dist(i, j));
            }
        }
    }

    #[test]
    fn unsupported_weight_type() {
        let text = "NAME : g\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : GEO\nEOF\n";
        assert!(matches!(parse_tsplib(text), Err(EdoError::Unsupported(_))));
    }

    #[test]
    fn malformed_header_names_line() {
        let text = "NAME : g\nDIMENSION : four\n";
        let err = parse_tsplib(text).unwrap_err();
        assert!(matches!(err, EdoError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn explicit_round_trip() {
        let text = "NAME : m\nTYPE : TSP\nDIMENSION : 5\nEDGE_WEIGHT_TYPE : EXPLICIT\nEDGE_WEIGHT_FORMAT : UPPER_ROW\nEDGE_WEIGHT_SECTION\n1 2.5 3 7\n4 5 0.125\n6 9\n11\nEOF\n";
        let a = parse_tsplib(text).unwrap();
        let b = parse_tsplib(&a.to_tsplib_explicit()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(a.dist(i, j).to_bits(), b.dist(i, j).to_bits());
            }
        }
    }

    #[test]
    fn unit_graph_weights() {
        let g = unit_graph(50).unwrap();
        assert_eq!(g.kind(), InstanceKind::Unit);
        assert_eq!(g.dist(3, 7), 1.0);
        assert_eq!(g.dist(7, 7), 0.0);
        assert!(unit_graph(3).is_err());
    }

    #[test]
    fn plain_cost_optimum() {
        let inst = unit_graph(5).unwrap();
        let opt = parse_opt_tour("426", &inst).unwrap();
        assert_eq!(opt.opt_cost(), 426.0);
        assert!(opt.opt_tour().is_none());
    }

    #[test]
    fn duplicate_node_in_tour_rejected() {
        let inst = unit_graph(4).unwrap();
        let text = "TYPE : TOUR\nDIMENSION : 4\nTOUR_SECTION\n1\n2\n1\n4\n-1\nEOF\n";
        assert!(matches!(parse_opt_tour(text, &inst), Err(EdoError::Validation(_))));
    }

    #[test]
    fn optimum_cost_mismatch_rejected() {
        let inst = unit_graph(4).unwrap();
        let t = Tour::identity(&inst);
        assert!(OptimumInfo::new(5.0, Some(t.clone())).is_err());
        assert!(OptimumInfo::new(4.0, Some(t)).is_ok());
    }
}
