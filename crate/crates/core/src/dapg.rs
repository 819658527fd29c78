//! Dual affine plane over `Z_d`.
//!
//! Points are the `d(d+1)` cells `(m, b)` of a `d × (d+1)` array whose
//! columns are the basis labels (computational basis first). A line is keyed
//! by its computational-column row `m̈` and its `b = 0` row `m(0)`, and meets
//! column `b` at row `m(b) = m(0) + (b/2)(2m̈ - 1)`.

use std::collections::HashMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{PrimeModulus, Residue};
use crate::error::{Error, Result};
use crate::mub::{BasisLabel, MubIndex};

/// A point of the geometry; the same coordinates label an MUB state.
pub type Point = MubIndex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    pub mddot: Residue,
    pub m0: Residue,
}

impl Line {
    pub fn new(mddot: Residue, m0: Residue) -> Self {
        mddot.check_same(m0).expect("line residues");
        Self { mddot, m0 }
    }

    /// From the `c` parameterization, `m̈ = c/2`.
    pub fn from_c(c: Residue, m0: Residue) -> Self {
        Self::new(c.half(), m0)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.mddot.modulus()
    }

    /// `c = 2m̈`.
    pub fn c(&self) -> Residue {
        self.mddot * 2
    }

    /// Canonical index `m̈·d + m(0)`, also used as the eigenvalue label of
    /// the control measurement.
    pub fn index(&self) -> usize {
        self.mddot.value() as usize * self.modulus().as_usize() + self.m0.value() as usize
    }

    pub fn from_index(p: PrimeModulus, index: usize) -> Self {
        let d = p.as_usize();
        Self::new(p.residue((index / d) as i64), p.residue((index % d) as i64))
    }

    /// All `d²` lines in index order.
    pub fn all(p: PrimeModulus) -> impl Iterator<Item = Line> + Clone {
        p.residues()
            .flat_map(move |a| p.residues().map(move |m0| Line::new(a, m0)))
    }

    /// Row where this line crosses column `b`.
    pub fn row_at(&self, b: BasisLabel) -> Residue {
        match b {
            BasisLabel::Computational => self.mddot,
            BasisLabel::Numeric(b) => {
                self.m0 + b.half() * (self.mddot * 2 - self.modulus().one())
            }
        }
    }

    pub fn point_at(&self, b: BasisLabel) -> Point {
        Point::new(self.row_at(b), b)
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.mddot, self.m0)
    }
}

impl Serialize for Line {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Line", 2)?;
        st.serialize_field("mddot", &self.mddot.value())?;
        st.serialize_field("m0", &self.m0.value())?;
        st.end()
    }
}

/// The `d + 1` points of a line, one per column, computational column first.
pub fn line_points(j: Line) -> Vec<Point> {
    BasisLabel::all(j.modulus()).map(|b| j.point_at(b)).collect()
}

pub fn point_on_line(p: Point, j: Line) -> bool {
    j.row_at(p.b) == p.m
}

/// The unique line through two points of different columns.
pub fn line_through(p1: Point, p2: Point) -> Result<Line> {
    use BasisLabel::*;
    let p = p1.modulus();
    let one = p.one();
    match (p1.b, p2.b) {
        (b1, b2) if b1 == b2 => Err(Error::SameColumn(format!("{p1}, {p2}"))),
        (Computational, Numeric(b)) | (Numeric(b), Computational) => {
            let (cb, other) = if p1.b.is_computational() { (p1, p2) } else { (p2, p1) };
            let mddot = cb.m;
            Ok(Line::new(mddot, other.m - b.half() * (mddot * 2 - one)))
        }
        (Computational, Computational) => unreachable!(),
        (Numeric(b1), Numeric(b2)) => {
            // m1 - m2 = ((b1 - b2)/2)·s with s = 2m̈ - 1
            let s = (p1.m - p2.m) * 2 * (b1 - b2).inv()?;
            let mddot = (s + one).half();
            Ok(Line::new(mddot, p1.m - b1.half() * s))
        }
    }
}

/// The `d` lines through a point.
pub fn lines_through_point(pt: Point) -> Vec<Line> {
    let p = pt.modulus();
    match pt.b {
        BasisLabel::Computational => p.residues().map(|m0| Line::new(pt.m, m0)).collect(),
        BasisLabel::Numeric(b) => p
            .residues()
            .map(|mddot| Line::new(mddot, pt.m - b.half() * (mddot * 2 - p.one())))
            .collect(),
    }
}

/// Materialized point-line incidence for one dimension.
#[derive(Clone, Debug)]
pub struct Incidence {
    modulus: PrimeModulus,
    lines: Vec<Line>,
    points: Vec<Point>,
    point_index: HashMap<Point, usize>,
    /// `rows[line][point]`
    rows: Vec<Vec<bool>>,
}

impl Incidence {
    pub fn new(p: PrimeModulus) -> Self {
        let lines: Vec<Line> = Line::all(p).collect();
        let points: Vec<Point> = MubIndex::all(p).collect();
        let point_index: HashMap<Point, usize> =
            points.iter().enumerate().map(|(i, &pt)| (pt, i)).collect();
        let rows = lines
            .iter()
            .map(|&j| {
                let mut row = vec![false; points.len()];
                for pt in line_points(j) {
                    row[point_index[&pt]] = true;
                }
                row
            })
            .collect();
        Self {
            modulus: p,
            lines,
            points,
            point_index,
            rows,
        }
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn incident(&self, pt: Point, j: Line) -> bool {
        self.rows[j.index()][self.point_index[&pt]]
    }

    pub fn matrix(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn points_of(&self, j: Line) -> Vec<Point> {
        self.rows[j.index()]
            .iter()
            .enumerate()
            .filter(|(_, &x)| x)
            .map(|(i, _)| self.points[i])
            .collect()
    }

    pub fn lines_of(&self, pt: Point) -> Vec<Line> {
        let k = self.point_index[&pt];
        self.lines
            .iter()
            .filter(|j| self.rows[j.index()][k])
            .copied()
            .collect()
    }

    /// 0/1 matrix as CSV, one row per line, one column per point. Labels
    /// use `;` inside the parentheses so no field needs quoting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("line");
        for pt in &self.points {
            out.push_str(&format!(",({};{})", pt.m, pt.b));
        }
        out.push('\n');
        for (j, row) in self.lines.iter().zip(&self.rows) {
            out.push_str(&format!("({};{})", j.mddot, j.m0));
            for &x in row {
                out.push_str(if x { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }

    pub fn verify_axioms(&self) -> AxiomReport {
        let d = self.modulus.as_usize();
        let rows = &self.rows;
        let n_lines = rows.len();
        let n_points = self.points.len();
        let mut checks = Vec::new();

        checks.push(AxiomCheck::new(
            "a",
            "d^2 lines and d(d+1) points",
            n_lines == d * d && n_points == d * (d + 1),
            format!("{n_lines} lines, {n_points} points"),
        ));

        let mut bad_pairs = 0usize;
        let mut pairs = 0usize;
        for i in 0..n_lines {
            for k in i + 1..n_lines {
                pairs += 1;
                let shared = (0..n_points).filter(|&x| rows[i][x] && rows[k][x]).count();
                if shared != 1 {
                    bad_pairs += 1;
                }
            }
        }
        checks.push(AxiomCheck::new(
            "b",
            "two distinct lines share exactly one point",
            bad_pairs == 0,
            format!("{pairs} line pairs, {bad_pairs} violations"),
        ));

        let row_sums: Vec<usize> = rows.iter().map(|r| r.iter().filter(|&&x| x).count()).collect();
        let col_sums: Vec<usize> = (0..n_points)
            .map(|x| rows.iter().filter(|r| r[x]).count())
            .collect();
        let lines_ok = row_sums.iter().all(|&s| s == d + 1);
        let points_ok = col_sums.iter().all(|&s| s == d);
        checks.push(AxiomCheck::new(
            "c",
            "d lines per point and d+1 points per line",
            lines_ok && points_ok,
            format!(
                "points per line in [{}, {}], lines per point in [{}, {}]",
                row_sums.iter().min().unwrap_or(&0),
                row_sums.iter().max().unwrap_or(&0),
                col_sums.iter().min().unwrap_or(&0),
                col_sums.iter().max().unwrap_or(&0)
            ),
        ));

        // Columns partition the points and no line holds two points of one column.
        let mut column_sizes = vec![0usize; d + 1];
        for pt in &self.points {
            column_sizes[pt.b.column()] += 1;
        }
        let partition = column_sizes.iter().all(|&s| s == d);
        let intra = rows.iter().any(|r| {
            let mut seen = vec![false; d + 1];
            self.points.iter().zip(r).any(|(pt, &x)| {
                if !x {
                    return false;
                }
                let c = pt.b.column();
                std::mem::replace(&mut seen[c], true)
            })
        });
        checks.push(AxiomCheck::new(
            "d",
            "d+1 columns of d mutually unconnected points partition the points",
            partition && !intra,
            format!("column sizes {column_sizes:?}, intra-column line: {intra}"),
        ));

        let mut unconnected = 0usize;
        for x in 0..n_points {
            for y in x + 1..n_points {
                if self.points[x].b == self.points[y].b {
                    continue;
                }
                let on = rows.iter().filter(|r| r[x] && r[y]).count();
                if on != 1 {
                    unconnected += 1;
                }
            }
        }
        checks.push(AxiomCheck::new(
            "e",
            "every pair of points in different columns lies on exactly one line",
            unconnected == 0,
            format!("{unconnected} violations"),
        ));

        AxiomReport {
            d: self.modulus.get(),
            lines: n_lines,
            points: n_points,
            checks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub axiom: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl AxiomCheck {
    fn new(axiom: &'static str, statement: &'static str, passed: bool, detail: String) -> Self {
        Self {
            axiom,
            statement,
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub d: u32,
    pub lines: usize,
    pub points: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify_axioms(p: PrimeModulus) -> AxiomReport {
    Incidence::new(p).verify_axioms()
}

/// Render a point set as `{(1,CB),(2,0),...}`.
pub fn format_points(points: &[Point]) -> String {
    let inner: Vec<String> = points.iter().map(|p| p.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::prime;

    fn pt(p: PrimeModulus, m: i64, b: Option<i64>) -> Point {
        match b {
            Some(b) => Point::numeric(p.residue(m), p.residue(b)),
            None => Point::computational(p.residue(m)),
        }
    }

    fn line(p: PrimeModulus, a: i64, m0: i64) -> Line {
        Line::new(p.residue(a), p.residue(m0))
    }

    #[test]
    fn worked_example_line() {
        let p = prime(3);
        let j = line(p, 1, 2);
        assert_eq!(format_points(&line_points(j)), "{(1,CB),(2,0),(1,1),(0,2)}");
        // m(1) = 2 + half(1)·(2 - 1) = 2 + 2 = 4 ≡ 1
        assert_eq!(j.row_at(BasisLabel::Numeric(p.one())).value(), 1);
        assert_eq!(Line::from_c(p.residue(2), p.residue(2)), j);
        assert_eq!(j.c().value(), 2);
    }

    #[test]
    fn incidence_examples() {
        let p = prime(3);
        let j = line(p, 1, 2);
        assert!(point_on_line(pt(p, 1, Some(1)), j));
        assert!(!point_on_line(pt(p, 0, Some(1)), j));
        for m0 in p.residues() {
            assert!(point_on_line(pt(p, 2, None), Line::new(p.residue(2), m0)));
        }
    }

    #[test]
    fn line_through_examples() {
        let p = prime(3);
        assert_eq!(line_through(pt(p, 2, Some(0)), pt(p, 1, Some(1))).unwrap(), line(p, 1, 2));
        assert_eq!(line_through(pt(p, 1, None), pt(p, 2, Some(0))).unwrap(), line(p, 1, 2));
        assert_eq!(line_through(pt(p, 2, Some(0)), pt(p, 1, None)).unwrap(), line(p, 1, 2));
        assert!(matches!(
            line_through(pt(p, 0, Some(1)), pt(p, 2, Some(1))),
            Err(Error::SameColumn(_))
        ));
    }

    #[test]
    fn line_through_round_trip() {
        for d in [3, 5, 7, 11] {
            let p = prime(d);
            for j in Line::all(p) {
                let pts = line_points(j);
                assert_eq!(pts.len(), d as usize + 1);
                for i in 0..pts.len() {
                    for k in 0..pts.len() {
                        if i != k {
                            assert_eq!(line_through(pts[i], pts[k]).unwrap(), j);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lines_through_point_properties() {
        let p = prime(3);
        let inc = Incidence::new(p);
        for &x in inc.points() {
            let ls = lines_through_point(x);
            assert_eq!(ls.len(), 3);
            assert!(ls.iter().all(|&j| point_on_line(x, j)));
            let mut ls_sorted = ls.clone();
            ls_sorted.sort();
            ls_sorted.dedup();
            assert_eq!(ls_sorted.len(), 3);
            assert_eq!(ls_sorted, inc.lines_of(x));
            // pairwise intersection is {x}
            for a in 0..3 {
                for b in a + 1..3 {
                    let pa = line_points(ls[a]);
                    let shared: Vec<_> = line_points(ls[b]).into_iter().filter(|q| pa.contains(q)).collect();
                    assert_eq!(shared, vec![x]);
                }
            }
            // the union minus x is exactly the points connected to x
            let mut union: Vec<Point> = ls.iter().flat_map(|&j| line_points(j)).filter(|&q| q != x).collect();
            union.sort();
            union.dedup();
            assert_eq!(union.len(), 9);
            let mut others: Vec<Point> = inc.points().iter().copied().filter(|q| q.b != x.b).collect();
            others.sort();
            assert_eq!(union, others);
        }
    }

    #[test]
    fn axioms_small() {
        for d in [3, 5, 7] {
            let r = verify_axioms(prime(d));
            assert!(r.all_passed(), "{r:?}");
            assert_eq!(r.lines, (d * d) as usize);
            assert_eq!(r.points, (d * (d + 1)) as usize);
        }
        let r = verify_axioms(prime(5));
        assert_eq!(r.checks[1].detail, "300 line pairs, 0 violations");
    }

    #[test]
    fn csv_shape() {
        let inc = Incidence::new(prime(3));
        let csv = inc.to_csv();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows.len(), 10);
        for r in &rows[1..] {
            let cells: Vec<&str> = r.split(',').skip(1).collect();
            assert_eq!(cells.len(), 12);
            assert_eq!(cells.iter().filter(|&&c| c == "1").count(), 4);
        }
    }

    #[test]
    fn index_round_trip() {
        let p = prime(7);
        for (i, j) in Line::all(p).enumerate() {
            assert_eq!(j.index(), i);
            assert_eq!(Line::from_index(p, i), j);
        }
    }
}
