use std::sync::Arc;

use crate::coupling::{ContextOptions, Incident, SolveContext};
use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::geometry::{ParametricCurve, RefractiveIndexField};
use crate::mesh::{LagrangeSpace, RingMeshBuilder, TriMesh};
use crate::scalar::Real;

/// How the mesh of refinement level `l` is obtained.
#[derive(Debug, Clone)]
pub enum MeshLadder<T> {
    /// `l` uniform refinements of a coarse mesh (nested levels).
    Uniform(TriMesh<T>),
    /// Graded ring mesh around a disk of `radius`, regenerated with
    /// `count * 2^l` interface vertices. Triangles inside the disk carry
    /// `tag`, all others 0. Levels are not nested.
    Disk {
        radius: T,
        count: usize,
        outer: T,
        circumradius: T,
        tag: u32,
    },
}

impl<T: Real> MeshLadder<T> {
    pub fn mesh(&self, level: usize) -> Result<TriMesh<T>> {
        match self {
            MeshLadder::Uniform(coarse) => Ok(coarse.refined(level)),
            MeshLadder::Disk {
                radius,
                count,
                outer,
                circumradius,
                tag,
            } => {
                let c = count
                    .checked_mul(1 << level)
                    .ok_or_else(|| Error::Mesh("ring count overflow".into()))?;
                let (builder, iface) = RingMeshBuilder::graded(*radius, c, *outer, *circumradius, true)?;
                builder.build(|annulus, _| if annulus <= iface { *tag } else { 0 })
            }
        }
    }

    pub fn is_nested(&self) -> bool {
        matches!(self, MeshLadder::Uniform(_))
    }
}

/// Complete description of one scattering configuration.
#[derive(Debug, Clone)]
pub struct Scene<T> {
    pub ladder: MeshLadder<T>,
    pub degree: usize,
    pub curve: ParametricCurve<T>,
    pub index: RefractiveIndexField<T>,
    pub k: T,
    pub incident: Incident<T>,
    pub options: ContextOptions,
}

impl<T: Real> Scene<T> {
    pub fn space(&self, level: usize) -> Result<Arc<LagrangeSpace<T>>> {
        Ok(Arc::new(LagrangeSpace::new(self.ladder.mesh(level)?, self.degree)?))
    }

    /// Assembled interior system at `level`, reusable across several `N`.
    pub fn fem(&self, level: usize) -> Result<Arc<FemSystem<T>>> {
        Ok(Arc::new(crate::fem::assemble(self.space(level)?, self.k, &self.index)?))
    }

    pub fn context(&self, level: usize, n: usize) -> Result<SolveContext<T>> {
        SolveContext::build(self.space(level)?, &self.index, &self.curve, self.k, n, self.options)
    }

    pub fn context_with(&self, fem: &Arc<FemSystem<T>>, n: usize) -> Result<SolveContext<T>> {
        SolveContext::with_fem(Arc::clone(fem), &self.index, &self.curve, n, self.options)
    }
}
