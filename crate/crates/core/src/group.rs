//! Enumerated finite groups with dense element indices.
//!
//! Elements are the integers `0..order`; the identity is always index `0`.
//! Products are computed on demand from coordinates, so no `|G|²`
//! multiplication table is ever stored.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// Largest group the exact kernels will enumerate unless told otherwise.
pub const DEFAULT_ENUMERATION_CAP: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Cyclic {
        n: usize,
    },
    /// Upper unitriangular 3×3 matrices over `Z_m`, element `(i, j, k)`
    /// ranked as `i·m² + j·m + k`.
    Heisenberg {
        m: usize,
    },
    /// Direct product, mixed radix with the first factor most significant.
    Product {
        factors: Vec<GroupTable>,
        strides: Vec<usize>,
    },
}

/// A fully enumerated finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTable {
    order: usize,
    kind: Kind,
    label: String,
}

impl GroupTable {
    /// The cyclic group `Z_n` under addition mod `n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::cyclic_with_cap(n, DEFAULT_ENUMERATION_CAP)
    }

    pub fn cyclic_with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return invalid("cyclic group order must be at least 1");
        }
        check_cap(format!("Z:{n}"), n as u128, cap)?;
        Ok(GroupTable {
            order: n,
            kind: Kind::Cyclic { n },
            label: format!("Z:{n}"),
        })
    }

    /// The Heisenberg group of unitriangular 3×3 matrices mod `m`.
    pub fn heisenberg(m: usize) -> Result<Self> {
        Self::heisenberg_with_cap(m, DEFAULT_ENUMERATION_CAP)
    }

    pub fn heisenberg_with_cap(m: usize, cap: usize) -> Result<Self> {
        if m < 2 {
            return invalid(format!("Heisenberg modulus must be at least 2, got {m}"));
        }
        let order = (m as u128).pow(3);
        check_cap(format!("H:{m}"), order, cap)?;
        Ok(GroupTable {
            order: order as usize,
            kind: Kind::Heisenberg { m },
            label: format!("H:{m}"),
        })
    }

    /// Direct product of the given factors with componentwise multiplication.
    pub fn product(factors: Vec<GroupTable>) -> Result<Self> {
        Self::product_with_cap(factors, DEFAULT_ENUMERATION_CAP)
    }

    pub fn product_with_cap(factors: Vec<GroupTable>, cap: usize) -> Result<Self> {
        if factors.is_empty() {
            return invalid("product of an empty list of groups");
        }
        let label = format!(
            "P:{}",
            factors
                .iter()
                .map(|f| f.nested_label())
                .collect::<Vec<_>>()
                .join(",")
        );
        let needed = factors
            .iter()
            .try_fold(1u128, |acc, f| acc.checked_mul(f.order as u128))
            .unwrap_or(u128::MAX);
        check_cap(label.clone(), needed, cap)?;
        let mut strides = vec![1usize; factors.len()];
        for i in (0..factors.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * factors[i + 1].order;
        }
        Ok(GroupTable {
            order: needed as usize,
            kind: Kind::Product { factors, strides },
            label,
        })
    }

    /// Parses `Z:<n>`, `H:<m>` or `P:<desc>,<desc>,...`.
    ///
    /// Nested products are written with parentheses, e.g. `P:(P:Z:2,Z:3),H:3`.
    pub fn parse(desc: &str, cap: usize) -> Result<Self> {
        let desc = desc.trim();
        let desc = strip_parens(desc);
        let (tag, rest) = desc
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("bad group descriptor '{desc}'")))?;
        match tag {
            "Z" => Self::cyclic_with_cap(parse_usize(rest)?, cap),
            "H" => Self::heisenberg_with_cap(parse_usize(rest)?, cap),
            "P" => {
                let parts = split_top_level(rest)?;
                let factors = parts
                    .iter()
                    .map(|p| Self::parse(p, cap))
                    .collect::<Result<Vec<_>>>()?;
                Self::product_with_cap(factors, cap)
            }
            _ => invalid(format!("unknown group kind '{tag}' in '{desc}'")),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn id_index(&self) -> usize {
        0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn nested_label(&self) -> String {
        match self.kind {
            Kind::Product { .. } => format!("({})", self.label),
            _ => self.label.clone(),
        }
    }

    /// The group law `a·b`.
    pub fn op(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.order && b < self.order);
        match &self.kind {
            Kind::Cyclic { n } => {
                let s = a + b;
                if s >= *n {
                    s - n
                } else {
                    s
                }
            }
            Kind::Heisenberg { m } => {
                let (i, j, k) = heis_split(a, *m);
                let (i2, j2, k2) = heis_split(b, *m);
                heis_join((i + i2) % m, (j + j2) % m, (k + k2 + i * j2) % m, *m)
            }
            Kind::Product { factors, strides } => {
                let mut out = 0;
                let (mut ra, mut rb) = (a, b);
                for (f, &s) in factors.iter().zip(strides) {
                    let (ca, cb) = (ra / s, rb / s);
                    ra %= s;
                    rb %= s;
                    out += f.op(ca, cb) * s;
                }
                out
            }
        }
    }

    /// The inverse `a⁻¹`.
    pub fn inv(&self, a: usize) -> usize {
        debug_assert!(a < self.order);
        match &self.kind {
            Kind::Cyclic { n } => (n - a) % n,
            Kind::Heisenberg { m } => {
                let (i, j, k) = heis_split(a, *m);
                // (i,j,k)⁻¹ = (-i, -j, ij - k)
                heis_join((m - i) % m, (m - j) % m, (i * j % m + m - k) % m, *m)
            }
            Kind::Product { factors, strides } => {
                let mut out = 0;
                let mut r = a;
                for (f, &s) in factors.iter().zip(strides) {
                    out += f.inv(r / s) * s;
                    r %= s;
                }
                out
            }
        }
    }

    /// Factor groups of a direct product; `None` for cyclic and Heisenberg groups.
    pub fn factors(&self) -> Option<&[GroupTable]> {
        match &self.kind {
            Kind::Product { factors, .. } => Some(factors),
            _ => None,
        }
    }

    /// Component indices of a product element.
    pub fn split(&self, a: usize) -> Vec<usize> {
        match &self.kind {
            Kind::Product { strides, .. } => {
                let mut r = a;
                strides
                    .iter()
                    .map(|&s| {
                        let c = r / s;
                        r %= s;
                        c
                    })
                    .collect()
            }
            _ => vec![a],
        }
    }

    /// Inverse of [`split`](Self::split).
    pub fn join(&self, components: &[usize]) -> usize {
        match &self.kind {
            Kind::Product { strides, .. } => {
                components.iter().zip(strides).map(|(c, s)| c * s).sum()
            }
            _ => components[0],
        }
    }

    /// The element equal to `element` in coordinate `factor` and the identity elsewhere.
    pub fn lift(&self, factor: usize, element: usize) -> usize {
        match &self.kind {
            Kind::Product { strides, .. } => element * strides[factor],
            _ => {
                assert_eq!(factor, 0, "non-product group has a single coordinate");
                element
            }
        }
    }

    /// Heisenberg coordinates `(i, j, k)` of an element.
    pub fn heisenberg_coords(&self, a: usize) -> Option<(usize, usize, usize)> {
        match self.kind {
            Kind::Heisenberg { m } => Some(heis_split(a, m)),
            _ => None,
        }
    }

    /// Index of the Heisenberg element `(i, j, k)`, coordinates reduced mod `m`.
    pub fn heisenberg_index(&self, i: i64, j: i64, k: i64) -> Option<usize> {
        match self.kind {
            Kind::Heisenberg { m } => {
                let r = |x: i64| x.rem_euclid(m as i64) as usize;
                Some(heis_join(r(i), r(j), r(k), m))
            }
            _ => None,
        }
    }

    /// Moduli of the cyclic factors when the group is a (nested) product of
    /// cycles, with coordinates matching [`cyclic_coords`](Self::cyclic_coords).
    pub fn cyclic_moduli(&self) -> Option<Vec<usize>> {
        match &self.kind {
            Kind::Cyclic { n } => Some(vec![*n]),
            Kind::Heisenberg { .. } => None,
            Kind::Product { factors, .. } => {
                let mut out = Vec::new();
                for f in factors {
                    out.extend(f.cyclic_moduli()?);
                }
                Some(out)
            }
        }
    }

    /// Flattened cyclic coordinates of an element of an abelian product of cycles.
    pub fn cyclic_coords(&self, a: usize) -> Vec<usize> {
        match &self.kind {
            Kind::Product { factors, .. } => self
                .split(a)
                .into_iter()
                .zip(factors)
                .flat_map(|(c, f)| f.cyclic_coords(c))
                .collect(),
            _ => vec![a],
        }
    }

    /// The default generating set used by the CLI and fixtures: `{0, ±1}` on
    /// cycles, the identity plus `i ± 1`, `j ± 1` on Heisenberg groups, and the
    /// union of lifted factor sets on products.
    pub fn standard_generators(&self) -> Vec<usize> {
        let mut out: Vec<usize> = match &self.kind {
            Kind::Cyclic { n } => vec![0, 1 % n, (n - 1) % n],
            Kind::Heisenberg { .. } => heisenberg_standard(self),
            Kind::Product { factors, .. } => factors
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    f.standard_generators()
                        .into_iter()
                        .map(move |g| (i, g))
                        .collect::<Vec<_>>()
                })
                .map(|(i, g)| self.lift(i, g))
                .collect(),
        };
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn heisenberg_standard(g: &GroupTable) -> Vec<usize> {
    [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]
        .iter()
        .map(|&(i, j)| g.heisenberg_index(i, j, 0).expect("heisenberg group"))
        .collect()
}

impl fmt::Display for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn heis_split(a: usize, m: usize) -> (usize, usize, usize) {
    (a / (m * m), (a / m) % m, a % m)
}

fn heis_join(i: usize, j: usize, k: usize, m: usize) -> usize {
    (i * m + j) * m + k
}

fn check_cap(what: String, needed: u128, cap: usize) -> Result<()> {
    if needed > cap as u128 {
        return Err(Error::CapacityExceeded { what, needed, cap });
    }
    Ok(())
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected a non-negative integer, got '{s}'")))
}

fn strip_parens(s: &str) -> &str {
    let mut s = s;
    while s.starts_with('(') && s.ends_with(')') && balanced(&s[1..s.len() - 1]) {
        s = s[1..s.len() - 1].trim();
    }
    s
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return invalid(format!("unbalanced parentheses in '{s}'"));
        }
    }
    if depth != 0 {
        return invalid(format!("unbalanced parentheses in '{s}'"));
    }
    parts.push(&s[start..]);
    if parts.iter().any(|p| p.trim().is_empty()) {
        return invalid(format!("empty factor in product descriptor '{s}'"));
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_laws(g: &GroupTable) {
        let n = g.order();
        for x in 0..n {
            assert_eq!(g.op(0, x), x);
            assert_eq!(g.op(x, 0), x);
            assert_eq!(g.op(x, g.inv(x)), 0);
            assert_eq!(g.op(g.inv(x), x), 0);
            for y in 0..n {
                let xy = g.op(x, y);
                for z in 0..n {
                    assert_eq!(g.op(xy, z), g.op(x, g.op(y, z)), "{} assoc", g.label());
                }
            }
        }
    }

    /// 3×3 unitriangular matrix product mod m, used as the Heisenberg oracle.
    fn matmul(a: [[i64; 3]; 3], b: [[i64; 3]; 3], m: i64) -> [[i64; 3]; 3] {
        let mut c = [[0i64; 3]; 3];
        for r in 0..3 {
            for s in 0..3 {
                c[r][s] = (0..3).map(|t| a[r][t] * b[t][s]).sum::<i64>().rem_euclid(m);
            }
        }
        c
    }

    fn as_matrix(g: &GroupTable, x: usize) -> [[i64; 3]; 3] {
        let (i, j, k) = g.heisenberg_coords(x).unwrap();
        [[1, i as i64, k as i64], [0, 1, j as i64], [0, 0, 1]]
    }

    #[test]
    fn cyclic_examples() {
        let z1 = GroupTable::cyclic(1).unwrap();
        assert_eq!(z1.order(), 1);
        let z5 = GroupTable::cyclic(5).unwrap();
        assert_eq!(z5.inv(2), 3);
        let z12 = GroupTable::cyclic(12).unwrap();
        assert_eq!(z12.op(7, 9), 4);
        assert!(matches!(
            GroupTable::cyclic(0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn heisenberg_examples_match_matrix_oracle() {
        let h = GroupTable::heisenberg(3).unwrap();
        assert_eq!(GroupTable::heisenberg(2).unwrap().order(), 8);
        let a = h.heisenberg_index(1, 0, 0).unwrap();
        let b = h.heisenberg_index(0, 1, 0).unwrap();
        assert_eq!(h.heisenberg_coords(h.op(a, b)), Some((1, 1, 1)));
        let c = h.heisenberg_index(1, 1, 0).unwrap();
        assert_eq!(h.heisenberg_coords(h.inv(c)), Some((2, 2, 1)));
        for x in 0..h.order() {
            for y in 0..h.order() {
                assert_eq!(
                    as_matrix(&h, h.op(x, y)),
                    matmul(as_matrix(&h, x), as_matrix(&h, y), 3)
                );
            }
        }
        assert!(GroupTable::heisenberg(1).is_err());
    }

    #[test]
    fn group_laws_hold_exhaustively() {
        for g in [
            GroupTable::cyclic(7).unwrap(),
            GroupTable::heisenberg(3).unwrap(),
            GroupTable::heisenberg(4).unwrap(),
            GroupTable::parse("P:Z:2,Z:3,Z:4", 1000).unwrap(),
            GroupTable::parse("P:H:2,Z:3", 1000).unwrap(),
        ] {
            check_laws(&g);
        }
    }

    #[test]
    fn heisenberg_center_has_order_m() {
        for m in 2..=5 {
            let h = GroupTable::heisenberg(m).unwrap();
            let center: Vec<usize> = (0..h.order())
                .filter(|&z| (0..h.order()).all(|x| h.op(z, x) == h.op(x, z)))
                .collect();
            assert_eq!(center.len(), m);
            for z in center {
                let (i, j, _) = h.heisenberg_coords(z).unwrap();
                assert_eq!((i, j), (0, 0));
            }
        }
    }

    /// Exhaustive search for a bijective homomorphism between two small groups.
    fn isomorphic(a: &GroupTable, b: &GroupTable) -> bool {
        fn extend(a: &GroupTable, b: &GroupTable, map: &mut Vec<Option<usize>>, x: usize) -> bool {
            if x == a.order() {
                let mut seen = vec![false; b.order()];
                for y in map.iter() {
                    let y = y.unwrap();
                    if seen[y] {
                        return false;
                    }
                    seen[y] = true;
                }
                return (0..a.order()).all(|p| {
                    (0..a.order())
                        .all(|q| map[a.op(p, q)].unwrap() == b.op(map[p].unwrap(), map[q].unwrap()))
                });
            }
            for y in 0..b.order() {
                map[x] = Some(y);
                if extend(a, b, map, x + 1) {
                    return true;
                }
            }
            map[x] = None;
            false
        }
        if a.order() != b.order() {
            return false;
        }
        let mut map = vec![None; a.order()];
        map[0] = Some(0);
        extend(a, b, &mut map, 1)
    }

    #[test]
    fn product_examples() {
        let z2 = GroupTable::cyclic(2).unwrap();
        let z3 = GroupTable::cyclic(3).unwrap();
        let p = GroupTable::product(vec![z2.clone(), z3.clone()]).unwrap();
        assert_eq!(p.order(), 6);
        assert!(isomorphic(&p, &GroupTable::cyclic(6).unwrap()));
        assert!(!isomorphic(
            &GroupTable::parse("P:Z:2,Z:2", 100).unwrap(),
            &GroupTable::cyclic(4).unwrap()
        ));

        let single = GroupTable::product(vec![GroupTable::cyclic(5).unwrap()]).unwrap();
        let z5 = GroupTable::cyclic(5).unwrap();
        for x in 0..5 {
            assert_eq!(single.inv(x), z5.inv(x));
            for y in 0..5 {
                assert_eq!(single.op(x, y), z5.op(x, y));
            }
        }

        let v4 = GroupTable::product(vec![z2.clone(), z2]).unwrap();
        let a = v4.join(&[1, 0]);
        let b = v4.join(&[0, 1]);
        assert_eq!(v4.split(v4.op(a, b)), vec![1, 1]);
    }

    #[test]
    fn capacity_is_enforced() {
        let err = GroupTable::parse("P:Z:300,Z:300", DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(
            err,
            Error::CapacityExceeded { needed: 90_000, .. }
        ));
        assert!(GroupTable::heisenberg_with_cap(40, DEFAULT_ENUMERATION_CAP).is_err());
        assert!(GroupTable::parse("P:Z:300,Z:300", 100_000).is_ok());
    }

    #[test]
    fn descriptors_parse() {
        let g = GroupTable::parse("P:(P:Z:2,Z:3),H:2", 1000).unwrap();
        assert_eq!(g.order(), 48);
        assert_eq!(g.label(), "P:(P:Z:2,Z:3),H:2");
        assert_eq!(GroupTable::parse(g.label(), 1000).unwrap(), g);
        for bad in ["", "Q:3", "Z:x", "P:", "P:Z:2,,Z:3", "P:(Z:2"] {
            assert!(GroupTable::parse(bad, 1000).is_err(), "{bad}");
        }
    }

    #[test]
    fn indexing_is_a_bijection() {
        let h = GroupTable::heisenberg(4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for x in 0..h.order() {
            let (i, j, k) = h.heisenberg_coords(x).unwrap();
            assert!(seen.insert((i, j, k)));
            assert_eq!(h.heisenberg_index(i as i64, j as i64, k as i64), Some(x));
        }
        let p = GroupTable::parse("P:Z:3,Z:4,Z:5", 100).unwrap();
        for x in 0..p.order() {
            assert_eq!(p.join(&p.split(x)), x);
        }
    }

    #[test]
    fn standard_generators() {
        assert_eq!(
            GroupTable::cyclic(10).unwrap().standard_generators(),
            vec![0, 1, 9]
        );
        assert_eq!(
            GroupTable::cyclic(2).unwrap().standard_generators(),
            vec![0, 1]
        );
        assert_eq!(
            GroupTable::heisenberg(3)
                .unwrap()
                .standard_generators()
                .len(),
            5
        );
        let p = GroupTable::parse("P:Z:3,Z:5", 100).unwrap();
        assert_eq!(p.standard_generators().len(), 5);
    }
}
