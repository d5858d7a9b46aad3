//! Turns a [`RunConfig`] into a solver [`Scene`].

use helmscat::coupling::{ContextOptions, Incident};
use helmscat::geometry::{IndexModel, Polygon, Region, RegionShape};
use helmscat::linalg::GmresOptions;
use helmscat::mesh::{octagon_fan, parse_msh, RingMeshBuilder};
use helmscat::postproc::MeshLadder;
use helmscat::{Error, ParametricCurve, RefractiveIndexField, Result, Scene, TriMesh};

use crate::config::{CurveConfig, IncidentConfig, IndexConfig, MeshConfig, RunConfig};

/// Radii of the Janus particle annulus and of the material split.
pub const JANUS_INNER: f64 = 0.8;
pub const JANUS_SPLIT: f64 = 1.2;
pub const JANUS_OUTER: f64 = 1.6;
/// Angular extent of each Janus particle in degrees, on 15° ring spokes.
pub const JANUS_SECTORS: [(f64, f64); 4] = [(0.0, 60.0), (90.0, 135.0), (180.0, 255.0), (285.0, 315.0)];

/// Interface vertex count of the Janus ring mesh: radial step 0.2, so the
/// particle radii 0.8, 1.2 and 1.6 are all rings.
const JANUS_RING_COUNT: usize = 48;
const JANUS_RING_OUTER: f64 = 2.4;

fn janus_sector(theta: f64) -> Option<usize> {
    let deg = theta.to_degrees().rem_euclid(360.0);
    JANUS_SECTORS.iter().position(|&(a, b)| deg > a && deg < b)
}

/// Ring mesh of the four-particle Janus scene. Particle `p` carries tag
/// `2p + 1` on its inner half (`0.8 < r < 1.2`) and `2p + 2` on its outer
/// half (`1.2 < r < 1.6`).
pub fn janus_mesh(circumradius: f64) -> Result<TriMesh> {
    let (builder, iface) = RingMeshBuilder::graded(
        JANUS_OUTER,
        JANUS_RING_COUNT,
        JANUS_RING_OUTER,
        circumradius,
        false,
    )?;
    builder.build(|annulus, c| {
        // Annuli iface-3 ..= iface span 0.8..1.6 in steps of 0.2.
        if annulus + 3 < iface || annulus > iface {
            return 0;
        }
        let outer_half = annulus + 1 >= iface;
        match janus_sector(c[1].atan2(c[0])) {
            Some(p) => 2 * p as u32 + 1 + u32::from(outer_half),
            None => 0,
        }
    })
}

fn annular_sector(r0: f64, r1: f64, deg0: f64, deg1: f64) -> Result<Polygon<f64>> {
    let steps = ((deg1 - deg0) / 7.5).round().max(1.0) as usize;
    let arc = |r: f64, j: usize| {
        let t = (deg0 + (deg1 - deg0) * j as f64 / steps as f64).to_radians();
        [r * t.cos(), r * t.sin()]
    };
    let mut v: Vec<[f64; 2]> = (0..=steps).map(|j| arc(r1, j)).collect();
    v.extend((0..=steps).rev().map(|j| arc(r0, j)));
    Polygon::new(v)
}

/// Piecewise-constant index of the Janus scene.
pub fn janus_index(n1: f64, n2: f64) -> Result<RefractiveIndexField> {
    let mut regions = Vec::new();
    for (p, &(a, b)) in JANUS_SECTORS.iter().enumerate() {
        for (half, (r0, r1, n)) in [(JANUS_INNER, JANUS_SPLIT, n1), (JANUS_SPLIT, JANUS_OUTER, n2)]
            .into_iter()
            .enumerate()
        {
            regions.push(Region {
                shape: RegionShape::Polygon(annular_sector(r0, r1, a, b)?),
                model: IndexModel::Constant(n * n),
                tag: Some(2 * p as u32 + 1 + half as u32),
            });
        }
    }
    RefractiveIndexField::new(regions)
}

fn tagged_index(mesh: &TriMesh, tags: &[(u32, f64)]) -> Result<RefractiveIndexField> {
    let mut regions = Vec::new();
    for &(tag, n) in tags {
        // Bounding disk of the tagged cells; the index itself applies by tag.
        let radius = (0..mesh.num_triangles())
            .filter(|&t| mesh.regions()[t] == tag)
            .flat_map(|t| mesh.triangle_points(t))
            .map(|p| p[0].hypot(p[1]))
            .fold(f64::NEG_INFINITY, f64::max);
        if radius == f64::NEG_INFINITY {
            return Err(Error::Config(vec![format!("mesh has no triangles with region tag {tag}")]));
        }
        regions.push(Region {
            shape: RegionShape::Disk {
                center: [0.0, 0.0],
                radius,
            },
            model: IndexModel::Constant(n * n),
            tag: Some(tag),
        });
    }
    RefractiveIndexField::new(regions)
}

fn curve(cfg: &RunConfig) -> Result<ParametricCurve> {
    let base = match cfg.geometry.curve {
        CurveConfig::Circle { radius } => ParametricCurve::circle(radius),
        CurveConfig::Ellipse { a, b } => ParametricCurve::ellipse(a, b),
        CurveConfig::RoundedSquare => ParametricCurve::rounded_square(),
    };
    if cfg.geometry.curve_scale == 1.0 {
        Ok(base)
    } else {
        base.scaled(cfg.geometry.curve_scale)
    }
}

/// Builds the scene; the mesh file, if any, is read here.
pub fn build_scene(cfg: &RunConfig) -> Result<Scene> {
    let (ladder, disk_radius) = match &cfg.geometry.mesh {
        MeshConfig::Octagon {
            circumradius,
            divisions,
        } => (MeshLadder::Uniform(octagon_fan(*circumradius, *divisions)), None),
        MeshConfig::Janus { circumradius } => (MeshLadder::Uniform(janus_mesh(*circumradius)?), None),
        MeshConfig::Disk {
            radius,
            ring_count,
            outer,
            circumradius,
        } => (
            MeshLadder::Disk {
                radius: *radius,
                count: *ring_count,
                outer: outer.unwrap_or(*radius),
                circumradius: *circumradius,
                tag: 1,
            },
            Some(*radius),
        ),
        MeshConfig::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
            (MeshLadder::Uniform(parse_msh(&text)?), None)
        }
    };
    let index = match &cfg.physics.index {
        IndexConfig::Free => RefractiveIndexField::free_space(),
        IndexConfig::Gaussian {
            amplitude,
            decay,
            radius,
        } => RefractiveIndexField::gaussian(*amplitude, *decay, *radius)?,
        IndexConfig::Disk { n } => {
            let radius = disk_radius.ok_or_else(|| Error::Config(vec!["`index = disk` needs `mesh = disk`".into()]))?;
            RefractiveIndexField::disk([0.0, 0.0], radius, *n, 1)?
        }
        IndexConfig::Janus { n1, n2 } => janus_index(*n1, *n2)?,
        IndexConfig::Tagged(tags) => match &ladder {
            MeshLadder::Uniform(mesh) => tagged_index(mesh, tags)?,
            MeshLadder::Disk { .. } => {
                return Err(Error::Config(vec!["`index = tagged` needs a fixed mesh".into()]));
            }
        },
    };
    let incident = match cfg.physics.incident {
        IncidentConfig::Plane { angle_deg } => Incident::plane(angle_deg.to_radians()),
        IncidentConfig::Point { source } => Incident::point(source),
    };
    let d = &cfg.discretization;
    Ok(Scene {
        ladder,
        degree: d.degree,
        curve: curve(cfg)?,
        index,
        k: cfg.physics.k,
        incident,
        options: ContextOptions {
            margin: d.margin,
            gmres: GmresOptions {
                tol: d.gmres_tol,
                max_iter: d.max_iterations,
            },
        },
    })
}
