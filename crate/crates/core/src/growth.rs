//! Volume growth, diameters and moderate-growth certificates of Cayley graphs.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::group::GroupTable;

/// A set of group elements used as Cayley graph edges `x → x·s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    members: Vec<usize>,
    symmetric: bool,
}

impl GeneratorSet {
    /// Builds a set from arbitrary members; symmetry is detected, and the set
    /// must generate the group.
    pub fn new(group: &GroupTable, members: &[usize]) -> Result<Self> {
        let mut members = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return invalid("generator set is empty");
        }
        if let Some(&bad) = members.iter().find(|&&x| x >= group.order()) {
            return invalid(format!("element {bad} is outside {}", group.label()));
        }
        let symmetric = members
            .iter()
            .all(|&x| members.binary_search(&group.inv(x)).is_ok());
        let set = GeneratorSet { members, symmetric };
        if !set.generates(group) {
            return Err(Error::NotGenerating(format!(
                "{:?} does not generate {}",
                set.members,
                group.label()
            )));
        }
        Ok(set)
    }

    /// Like [`new`](Self::new) but rejects sets not closed under inversion.
    pub fn symmetric(group: &GroupTable, members: &[usize]) -> Result<Self> {
        let set = Self::new(group, members)?;
        if !set.symmetric {
            return invalid(format!("generator set {:?} is not symmetric", set.members));
        }
        Ok(set)
    }

    /// Parses comma-separated signed integers for cycles (reduced mod n).
    pub fn parse_cyclic(group: &GroupTable, spec: &str) -> Result<Self> {
        let n = match group.cyclic_moduli().as_deref() {
            Some([n]) => *n as i64,
            _ => return invalid("integer generator lists are only defined for Z:<n>"),
        };
        let members = spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<i64>()
                    .map(|x| x.rem_euclid(n) as usize)
                    .map_err(|_| Error::InvalidParameter(format!("bad generator '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, &members)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Closure test: BFS from the identity reaches every element.
    fn generates(&self, group: &GroupTable) -> bool {
        let mut visited = vec![false; group.order()];
        visited[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &s in &self.members {
                let y = group.op(x, s);
                if !visited[y] {
                    visited[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == group.order()
    }
}

/// Volume growth `V(m) = |E^m|` up to the diameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthProfile {
    /// `volumes[m - 1] = V(m)` for `m = 1..=diameter`.
    pub volumes: Vec<usize>,
    pub diameter: usize,
    pub group_order: usize,
}

impl GrowthProfile {
    pub fn volume(&self, m: usize) -> usize {
        assert!(m >= 1, "V(m) is defined for m >= 1");
        self.volumes[(m - 1).min(self.volumes.len() - 1)]
    }
}

/// Outcome of testing `V(m)/V(ρ) >= (1/A)(m/ρ)^d` for every `1 <= m <= ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModerateGrowthCert {
    pub a: f64,
    pub d: f64,
    pub satisfied: bool,
}

/// Relative slack on the moderate-growth comparison, so that `minimal_a`
/// certifies itself despite rounding.
const CERT_SLACK: f64 = 1e-12;

/// Computes `V(1..=ρ)` and the diameter `ρ = min{m >= 1 : V(m) = |G|}`.
///
/// When the identity is in `E`, `E^m` is the BFS ball of radius `m`;
/// otherwise the exact product sets `E^m` are expanded level by level.
pub fn growth_profile(group: &GroupTable, gens: &GeneratorSet) -> Result<GrowthProfile> {
    let n = group.order();
    if n < 2 {
        return invalid("the diameter of the trivial group is undefined");
    }
    let volumes = if gens.contains(group.id_index()) {
        ball_volumes(group, gens)?
    } else {
        product_set_volumes(group, gens)?
    };
    Ok(GrowthProfile {
        diameter: volumes.len(),
        volumes,
        group_order: n,
    })
}

fn ball_volumes(group: &GroupTable, gens: &GeneratorSet) -> Result<Vec<usize>> {
    let n = group.order();
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut frontier = vec![0usize];
    let mut total = 1;
    let mut volumes = Vec::new();
    while total < n {
        let mut next = Vec::new();
        for &x in &frontier {
            for &s in gens.members() {
                let y = group.op(x, s);
                if !visited[y] {
                    visited[y] = true;
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return Err(Error::NotGenerating(format!(
                "BFS stalled at {total} of {n} elements"
            )));
        }
        total += next.len();
        volumes.push(total);
        frontier = next;
    }
    if volumes.is_empty() {
        unreachable!("groups of order >= 2 need at least one BFS level");
    }
    Ok(volumes)
}

fn product_set_volumes(group: &GroupTable, gens: &GeneratorSet) -> Result<Vec<usize>> {
    let n = group.order();
    let mut members: Vec<usize> = gens.members().to_vec();
    let mut volumes = vec![members.len()];
    while members.len() < n {
        let mut next = vec![false; n];
        let mut next_members = Vec::with_capacity(members.len() * 2);
        for &x in &members {
            for &s in gens.members() {
                let y = group.op(x, s);
                if !next[y] {
                    next[y] = true;
                    next_members.push(y);
                }
            }
        }
        // |E^{m+1}| >= |E^m|, and equality below |G| repeats forever.
        if next_members.len() == members.len() {
            return Err(Error::NotGenerating(format!(
                "E^m stalls at {} of {n} elements (periodic product sets)",
                members.len()
            )));
        }
        volumes.push(next_members.len());
        members = next_members;
    }
    Ok(volumes)
}

/// Checks the `(A, d)`-moderate growth inequality at every `1 <= m <= ρ`.
pub fn check_moderate_growth(profile: &GrowthProfile, a: f64, d: f64) -> ModerateGrowthCert {
    let satisfied = a > 0.0
        && d > 0.0
        && (1..=profile.diameter).all(|m| {
            let (lhs, rhs) = moderate_growth_sides(profile, m, a, d);
            lhs >= rhs * (1.0 - CERT_SLACK)
        });
    ModerateGrowthCert { a, d, satisfied }
}

/// `(V(m)/V(ρ), (1/A)(m/ρ)^d)`.
pub fn moderate_growth_sides(profile: &GrowthProfile, m: usize, a: f64, d: f64) -> (f64, f64) {
    let rho = profile.diameter as f64;
    let lhs = profile.volume(m) as f64 / profile.volume(profile.diameter) as f64;
    let rhs = (m as f64 / rho).powf(d) / a;
    (lhs, rhs)
}

/// The smallest `A` for which the profile has `(A, d)`-moderate growth.
pub fn minimal_a(profile: &GrowthProfile, d: f64) -> f64 {
    let rho = profile.diameter as f64;
    let top = profile.volume(profile.diameter) as f64;
    (1..=profile.diameter)
        .map(|m| (m as f64 / rho).powf(d) * top / profile.volume(m) as f64)
        .fold(0.0, f64::max)
}
