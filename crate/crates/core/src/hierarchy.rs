//! Root / father / leaf roles of node types relative to the target type.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::HeteroGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Root,
    Father,
    Leaf,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Role::Root => "root",
            Role::Father => "father",
            Role::Leaf => "leaf",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "root" => Ok(Role::Root),
            "father" => Ok(Role::Father),
            "leaf" => Ok(Role::Leaf),
            other => Err(Error::Config(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeHierarchy {
    pub roles: BTreeMap<String, Role>,
    /// Hops from the target type in the schema graph.
    pub distance: BTreeMap<String, usize>,
    /// Leaf types with no schema edge to any father type; they cannot be
    /// anchored and vanish from a condensed graph.
    pub ambiguous: Vec<String>,
}

impl TypeHierarchy {
    pub fn role(&self, ty: &str) -> Option<Role> {
        self.roles.get(ty).copied()
    }

    fn with_role(&self, role: Role) -> Vec<String> {
        let mut out: Vec<&String> = self
            .roles
            .iter()
            .filter(|(_, &r)| r == role)
            .map(|(t, _)| t)
            .collect();
        out.sort_by_key(|t| (self.distance[*t], t.as_str()));
        out.into_iter().cloned().collect()
    }

    /// Father types, nearest to the root first.
    pub fn fathers(&self) -> Vec<String> {
        self.with_role(Role::Father)
    }

    pub fn leaves(&self) -> Vec<String> {
        self.with_role(Role::Leaf)
    }

    /// Replaces roles from a `type role` override list. The target type
    /// must stay the only root.
    pub fn apply_overrides(
        &mut self,
        graph: &HeteroGraph,
        overrides: &BTreeMap<String, Role>,
    ) -> Result<()> {
        for (ty, &role) in overrides {
            if !self.roles.contains_key(ty) {
                return Err(Error::Config(format!(
                    "role override for unknown type {ty}"
                )));
            }
            if (role == Role::Root) != (*ty == graph.target_type) {
                return Err(Error::Config(format!(
                    "only the target type {} can be the root",
                    graph.target_type
                )));
            }
            self.roles.insert(ty.clone(), role);
        }
        self.ambiguous = unanchored_leaves(graph, &self.roles);
        Ok(())
    }
}

fn schema_neighbors(graph: &HeteroGraph) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> =
        graph.type_names().map(|t| (t, BTreeSet::new())).collect();
    for r in &graph.relations {
        if r.src_type != r.dst_type {
            if let Some(s) = adj.get_mut(r.src_type.as_str()) {
                s.insert(&r.dst_type);
            }
            if let Some(s) = adj.get_mut(r.dst_type.as_str()) {
                s.insert(&r.src_type);
            }
        }
    }
    adj
}

fn bfs<'a>(
    adj: &BTreeMap<&'a str, BTreeSet<&'a str>>,
    root: &'a str,
    removed: Option<&str>,
) -> BTreeMap<&'a str, usize> {
    let mut dist = BTreeMap::from([(root, 0usize)]);
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        let d = dist[t];
        for &n in &adj[t] {
            if Some(n) != removed && !dist.contains_key(n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

fn unanchored_leaves(graph: &HeteroGraph, roles: &BTreeMap<String, Role>) -> Vec<String> {
    let adj = schema_neighbors(graph);
    roles
        .iter()
        .filter(|(_, &r)| r == Role::Leaf)
        .filter(|(t, _)| !adj[t.as_str()].iter().any(|n| roles[*n] == Role::Father))
        .map(|(t, _)| t.clone())
        .collect()
}

/// BFS over the schema from the target type. Distance 0 is the root; a type
/// is a father if it is adjacent to the root or if removing it disconnects
/// some other type from the root; everything else is a leaf.
pub fn classify_hierarchy(graph: &HeteroGraph) -> Result<TypeHierarchy> {
    let adj = schema_neighbors(graph);
    let root = graph.target_type.as_str();
    if !adj.contains_key(root) {
        return Err(Error::contract(format!(
            "target type {root} is not declared"
        )));
    }
    let dist = bfs(&adj, root, None);
    if let Some(t) = graph.type_names().find(|t| !dist.contains_key(t)) {
        return Err(Error::Unreachable(t.to_string()));
    }

    let mut roles = BTreeMap::new();
    for t in graph.type_names() {
        let role = match dist[t] {
            0 => Role::Root,
            1 => Role::Father,
            _ => {
                let without = bfs(&adj, root, Some(t));
                if without.len() + 1 < dist.len() {
                    Role::Father
                } else {
                    Role::Leaf
                }
            }
        };
        roles.insert(t.to_string(), role);
    }
    let ambiguous = unanchored_leaves(graph, &roles);
    Ok(TypeHierarchy {
        distance: dist.into_iter().map(|(t, d)| (t.to_string(), d)).collect(),
        roles,
        ambiguous,
    })
}

/// Parses `type role` lines (blank lines and `#` comments ignored).
pub fn parse_role_overrides(text: &str) -> Result<BTreeMap<String, Role>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [ty, role] = toks.as_slice() else {
            return Err(Error::Config(format!(
                "role file line {}: expected `type role`",
                i + 1
            )));
        };
        out.insert(ty.to_string(), role.parse()?);
    }
    Ok(out)
}
