use crate::bicop::BivariateCopula;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{CopulaVertex, VarSet, VineStructure};

/// A vine structure with one fitted pair-copula per copula vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VineModel<T> {
    structure: VineStructure,
    copulas: Vec<Vec<BivariateCopula<T>>>,
    default_order: Option<Vec<usize>>,
    cond_set: Option<VarSet>,
    provenance: Option<String>,
}

impl<T: Scalar> VineModel<T> {
    /// `copulas[k][i]` belongs to `structure.level(k)[i]`.
    pub fn new(structure: VineStructure, copulas: Vec<Vec<BivariateCopula<T>>>) -> Result<Self> {
        let shape_ok = copulas.len() == structure.levels().len()
            && copulas
                .iter()
                .zip(structure.levels())
                .all(|(c, l)| c.len() == l.len());
        if !shape_ok {
            return Err(Error::InvalidInput(
                "copula list does not match the structure's levels".into(),
            ));
        }
        Ok(VineModel {
            structure,
            copulas,
            default_order: None,
            cond_set: None,
            provenance: None,
        })
    }

    /// Builds from `(vertex, copula)` pairs in any order.
    pub fn from_vertices(d: usize, pairs: Vec<(CopulaVertex, BivariateCopula<T>)>) -> Result<Self> {
        let structure = VineStructure::new(d, pairs.iter().map(|p| p.0).collect())?;
        let mut copulas: Vec<Vec<BivariateCopula<T>>> = structure
            .levels()
            .iter()
            .map(|l| vec![BivariateCopula::independence(); l.len()])
            .collect();
        for (v, c) in pairs {
            let (k, i) = structure.find(&v).expect("validated vertex is indexed");
            copulas[k][i] = c;
        }
        VineModel::new(structure, copulas)
    }

    pub fn independence(structure: VineStructure) -> Self {
        let copulas = structure
            .levels()
            .iter()
            .map(|l| vec![BivariateCopula::independence(); l.len()])
            .collect();
        VineModel {
            structure,
            copulas,
            default_order: None,
            cond_set: None,
            provenance: None,
        }
    }

    /// Same copula on every vertex.
    pub fn uniform(structure: VineStructure, copula: BivariateCopula<T>) -> Self {
        let copulas = structure
            .levels()
            .iter()
            .map(|l| vec![copula; l.len()])
            .collect();
        VineModel {
            structure,
            copulas,
            default_order: None,
            cond_set: None,
            provenance: None,
        }
    }

    pub fn d(&self) -> usize {
        self.structure.d()
    }

    pub fn structure(&self) -> &VineStructure {
        &self.structure
    }

    pub fn copula(&self, level: usize, idx: usize) -> &BivariateCopula<T> {
        &self.copulas[level][idx]
    }

    pub fn copulas(&self) -> &[Vec<BivariateCopula<T>>] {
        &self.copulas
    }

    pub fn set_copula(&mut self, level: usize, idx: usize, copula: BivariateCopula<T>) {
        self.copulas[level][idx] = copula;
    }

    /// `(vertex, copula)` pairs level by level.
    pub fn pairs(&self) -> impl Iterator<Item = (&CopulaVertex, &BivariateCopula<T>)> {
        self.structure
            .levels()
            .iter()
            .zip(&self.copulas)
            .flat_map(|(l, c)| l.iter().zip(c))
    }

    pub fn default_order(&self) -> Option<&[usize]> {
        self.default_order.as_deref()
    }

    pub fn cond_set(&self) -> Option<VarSet> {
        self.cond_set
    }

    pub fn with_default_order(mut self, order: Option<Vec<usize>>) -> Self {
        self.default_order = order;
        self
    }

    /// Free-text note stored alongside the model.
    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn with_provenance(mut self, note: Option<String>) -> Self {
        self.provenance = note;
        self
    }

    pub fn with_cond_set(mut self, cond: Option<VarSet>) -> Self {
        self.cond_set = cond;
        self
    }
}
