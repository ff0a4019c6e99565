use std::collections::HashMap;

use crate::graph::NodeId;

/// Per-node storage that starts as a hash map over touched nodes and turns
/// into a dense array once more than a quarter of the nodes are touched.
#[derive(Debug, Clone)]
pub(crate) enum NodeMap<T> {
    Sparse { n: usize, map: HashMap<NodeId, T> },
    Dense(Vec<T>),
}

impl<T: Copy + Default + PartialEq> NodeMap<T> {
    pub fn new(n: usize) -> Self {
        NodeMap::Sparse {
            n,
            map: HashMap::new(),
        }
    }

    #[inline]
    pub fn get(&self, u: NodeId) -> T {
        match self {
            NodeMap::Sparse { map, .. } => map.get(&u).copied().unwrap_or_default(),
            NodeMap::Dense(v) => v[u as usize],
        }
    }

    #[inline]
    pub fn set(&mut self, u: NodeId, value: T) {
        match self {
            NodeMap::Sparse { n, map } => {
                map.insert(u, value);
                if map.len() * 4 > *n {
                    self.densify();
                }
            }
            NodeMap::Dense(v) => v[u as usize] = value,
        }
    }

    fn densify(&mut self) {
        if let NodeMap::Sparse { n, map } = self {
            let mut dense = vec![T::default(); *n];
            for (&u, &value) in map.iter() {
                dense[u as usize] = value;
            }
            *self = NodeMap::Dense(dense);
        }
    }

    #[cfg(test)]
    pub fn is_dense(&self) -> bool {
        matches!(self, NodeMap::Dense(_))
    }

    /// Entries different from the default value, sorted by node id.
    pub fn nonzero(&self) -> Vec<(NodeId, T)> {
        let zero = T::default();
        let mut out: Vec<(NodeId, T)> = match self {
            NodeMap::Sparse { map, .. } => map
                .iter()
                .filter(|(_, &v)| v != zero)
                .map(|(&u, &v)| (u, v))
                .collect(),
            NodeMap::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != zero)
                .map(|(u, &x)| (u as NodeId, x))
                .collect(),
        };
        out.sort_unstable_by_key(|&(u, _)| u);
        out
    }
}

impl NodeMap<f64> {
    /// Adds `delta` to the entry of `u` and returns the new value.
    #[inline]
    pub fn add(&mut self, u: NodeId, delta: f64) -> f64 {
        let value = self.get(u) + delta;
        self.set(u, value);
        value
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            NodeMap::Sparse { n, map } => {
                let mut dense = vec![0.0; *n];
                for (&u, &value) in map {
                    dense[u as usize] = value;
                }
                dense
            }
            NodeMap::Dense(v) => v.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn densifies_past_a_quarter() {
        let mut m = NodeMap::<f64>::new(8);
        m.add(3, 1.5);
        m.add(3, 0.5);
        m.set(5, 1.0);
        assert!(!m.is_dense());
        m.set(6, 0.25);
        assert!(m.is_dense());
        assert_eq!(m.get(3), 2.0);
        assert_eq!(m.get(0), 0.0);
        assert_eq!(m.nonzero(), vec![(3, 2.0), (5, 1.0), (6, 0.25)]);
    }
}
