//! Disjoint-set forest with path compression and union by rank.

use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone)]
pub struct DisjointSet<K> {
    parent: HashMap<K, K>,
    rank: HashMap<K, u32>,
}

impl<K: Hash + Eq + Clone> Default for DisjointSet<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Hash + Eq + Clone> DisjointSet<K> {
    pub fn new() -> Self {
        DisjointSet {
            parent: HashMap::new(),
            rank: HashMap::new(),
        }
    }

    /// Adds `x` as a singleton unless already present.
    pub fn insert(&mut self, x: K) {
        if !self.parent.contains_key(&x) {
            self.parent.insert(x.clone(), x.clone());
            self.rank.insert(x, 0);
        }
    }

    pub fn contains(&self, x: &K) -> bool {
        self.parent.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Representative of `x`'s component; inserts `x` if it is new.
    pub fn find(&mut self, x: &K) -> K {
        self.insert(x.clone());
        let mut root = x.clone();
        loop {
            let p = &self.parent[&root];
            if *p == root {
                break;
            }
            root = p.clone();
        }
        let mut cur = x.clone();
        while cur != root {
            let next = self.parent.insert(cur, root.clone()).expect("inserted above");
            cur = next;
        }
        root
    }

    /// Merges the components of `x` and `y`; returns false if already joined.
    pub fn union(&mut self, x: &K, y: &K) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        let (kx, ky) = (self.rank[&rx], self.rank[&ry]);
        if kx < ky {
            self.parent.insert(rx, ry);
        } else {
            self.parent.insert(ry, rx.clone());
            if kx == ky {
                *self.rank.get_mut(&rx).expect("root has a rank") += 1;
            }
        }
        true
    }

    pub fn connected(&mut self, x: &K, y: &K) -> bool {
        self.find(x) == self.find(y)
    }

    /// Number of components among inserted keys.
    pub fn components(&mut self) -> usize {
        let keys: Vec<K> = self.parent.keys().cloned().collect();
        keys.iter().filter(|k| self.find(k) == **k).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unions_and_finds() {
        let mut ds = DisjointSet::new();
        for i in 0..6 {
            ds.insert(i);
        }
        assert!(ds.union(&0, &1));
        assert!(ds.union(&2, &3));
        assert!(!ds.union(&1, &0));
        assert!(ds.union(&1, &3));
        assert!(ds.connected(&0, &2));
        assert!(!ds.connected(&0, &4));
        assert_eq!(ds.components(), 3);
        let r = ds.find(&3);
        assert_eq!(ds.find(&3), r);
    }
}
