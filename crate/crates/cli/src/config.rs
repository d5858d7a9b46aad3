//! `[section]` / `key = value` run configuration.
//!
//! Parsing collects every violation before failing, so a broken file is
//! reported in one pass.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use helmscat::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    Bool,
    Text,
}

/// Recognized keys: `(section, key, kind, required)`.
const SCHEMA: &[(&str, &str, Kind, bool)] = &[
    ("geometry", "mesh", Kind::Text, true),
    ("geometry", "circumradius", Kind::Float, false),
    ("geometry", "divisions", Kind::Int, false),
    ("geometry", "disk_radius", Kind::Float, false),
    ("geometry", "ring_count", Kind::Int, false),
    ("geometry", "disk_outer", Kind::Float, false),
    ("geometry", "mesh_file", Kind::Text, false),
    ("geometry", "refinements", Kind::Int, false),
    ("geometry", "curve", Kind::Text, true),
    ("geometry", "curve_scale", Kind::Float, false),
    ("geometry", "curve_radius", Kind::Float, false),
    ("geometry", "curve_a", Kind::Float, false),
    ("geometry", "curve_b", Kind::Float, false),
    ("physics", "k", Kind::Float, true),
    ("physics", "index", Kind::Text, true),
    ("physics", "gaussian_amplitude", Kind::Float, false),
    ("physics", "gaussian_decay", Kind::Float, false),
    ("physics", "gaussian_radius", Kind::Float, false),
    ("physics", "disk_n", Kind::Float, false),
    ("physics", "janus_n1", Kind::Float, false),
    ("physics", "janus_n2", Kind::Float, false),
    ("physics", "tags", Kind::Text, false),
    ("physics", "incident", Kind::Text, false),
    ("physics", "angle_deg", Kind::Float, false),
    ("physics", "source", Kind::Text, false),
    ("discretization", "degree", Kind::Int, true),
    ("discretization", "n", Kind::Int, true),
    ("discretization", "gmres_tol", Kind::Float, false),
    ("discretization", "max_iterations", Kind::Int, false),
    ("discretization", "margin", Kind::Float, false),
    ("output", "dir", Kind::Text, false),
    ("output", "angles", Kind::Int, false),
    ("output", "directions", Kind::Int, false),
    ("output", "grid", Kind::Text, false),
    ("output", "vtk", Kind::Bool, false),
];

#[derive(Debug, Clone, PartialEq)]
pub enum MeshConfig {
    /// Fan-refined regular octagon with `divisions` segments per side.
    Octagon { circumradius: f64, divisions: usize },
    /// Ring mesh carrying the reduced four-particle Janus scene.
    Janus { circumradius: f64 },
    /// Ring mesh aligned with a disk of `radius`, regenerated per level.
    Disk {
        radius: f64,
        ring_count: usize,
        /// Radius up to which circular rings continue; defaults to `radius`.
        outer: Option<f64>,
        circumradius: f64,
    },
    /// Gmsh 2.2 ASCII file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveConfig {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    RoundedSquare,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexConfig {
    Free,
    Gaussian { amplitude: f64, decay: f64, radius: f64 },
    /// Homogeneous disk (mesh must be `disk`), index not squared.
    Disk { n: f64 },
    Janus { n1: f64, n2: f64 },
    /// Region tag to index (not squared).
    Tagged(Vec<(u32, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IncidentConfig {
    Plane { angle_deg: f64 },
    Point { source: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub mesh: MeshConfig,
    pub refinements: usize,
    pub curve: CurveConfig,
    pub curve_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub k: f64,
    pub index: IndexConfig,
    pub incident: IncidentConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationConfig {
    pub degree: usize,
    pub n: usize,
    pub gmres_tol: f64,
    pub max_iterations: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub angles: usize,
    pub directions: usize,
    pub grid: Option<GridConfig>,
    pub vtk: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub discretization: DiscretizationConfig,
    pub output: OutputConfig,
}

struct Entry {
    value: String,
    line: usize,
}

struct Reader {
    entries: BTreeMap<(String, String), Entry>,
    errors: Vec<String>,
}

impl Reader {
    fn raw(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.entries.get(&(section.to_string(), key.to_string()))?;
        Some((e.value.clone(), e.line))
    }

    fn mismatch(&mut self, section: &str, key: &str, line: usize, want: &str, got: &str) {
        let msg = format!("line {line}: type mismatch for `{section}.{key}`: expected {want}, got `{got}`");
        // Keys are read more than once; report each problem once.
        if !self.errors.contains(&msg) {
            self.errors.push(msg);
        }
    }

    fn float(&mut self, section: &str, key: &str, default: f64) -> f64 {
        match self.raw(section, key) {
            None => default,
            Some((v, line)) => v.parse::<f64>().ok().filter(|x| x.is_finite()).unwrap_or_else(|| {
                self.mismatch(section, key, line, "a finite number", &v);
                default
            }),
        }
    }

    fn int(&mut self, section: &str, key: &str, default: usize) -> usize {
        match self.raw(section, key) {
            None => default,
            Some((v, line)) => v.parse::<usize>().unwrap_or_else(|_| {
                self.mismatch(section, key, line, "a non-negative integer", &v);
                default
            }),
        }
    }

    fn boolean(&mut self, section: &str, key: &str, default: bool) -> bool {
        match self.raw(section, key) {
            None => default,
            Some((v, line)) => match v.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => {
                    self.mismatch(section, key, line, "true or false", &v);
                    default
                }
            },
        }
    }

    fn text(&mut self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(|(v, _)| v)
    }

    /// Value of a key that the chosen variant needs.
    fn need_float(&mut self, section: &str, key: &str, why: &str) -> f64 {
        if self.raw(section, key).is_none() {
            self.errors.push(format!("missing required key `{section}.{key}` ({why})"));
            return 1.0;
        }
        self.float(section, key, 1.0)
    }

    fn floats(&mut self, section: &str, key: &str, count: usize) -> Option<Vec<f64>> {
        let (v, line) = self.raw(section, key)?;
        let parts: Option<Vec<f64>> = v.split(',').map(|s| s.trim().parse::<f64>().ok()).collect();
        match parts {
            Some(p) if p.len() == count && p.iter().all(|x| x.is_finite()) => Some(p),
            _ => {
                self.mismatch(section, key, line, &format!("{count} comma-separated numbers"), &v);
                None
            }
        }
    }

    fn choice(&mut self, section: &str, key: &str, options: &[&str]) -> Option<String> {
        let (v, line) = self.raw(section, key)?;
        if options.contains(&v.as_str()) {
            Some(v)
        } else {
            self.errors.push(format!(
                "line {line}: `{section}.{key}` must be one of {}, got `{v}`",
                options.join(", ")
            ));
            None
        }
    }
}

fn tokenize(text: &str) -> (BTreeMap<(String, String), Entry>, Vec<String>) {
    let mut entries = BTreeMap::new();
    let mut errors = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) => {
                    let name = name.trim().to_string();
                    if !SCHEMA.iter().any(|(s, ..)| *s == name) {
                        errors.push(format!("line {line}: unknown section `[{name}]`"));
                    }
                    section = Some(name);
                }
                None => errors.push(format!("line {line}: malformed section header `{content}`")),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(format!("line {line}: expected `key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().trim_matches('"').to_string();
        let Some(sec) = section.clone() else {
            errors.push(format!("line {line}: key `{key}` appears before any section"));
            continue;
        };
        if !SCHEMA.iter().any(|(s, k, ..)| *s == sec && *k == key) {
            if SCHEMA.iter().any(|(s, ..)| *s == sec) {
                errors.push(format!("line {line}: unknown key `{key}` in [{sec}]"));
            }
            continue;
        }
        if let Some(prev) = entries.insert((sec.clone(), key.clone()), Entry { value, line }) {
            errors.push(format!("line {line}: duplicate key `{sec}.{key}` (first on line {})", prev.line));
        }
    }
    (entries, errors)
}

/// Parses and validates a configuration. Relative paths stay as written;
/// see [`load_config`] for file-relative resolution.
pub fn parse_config(text: &str) -> Result<RunConfig, Error> {
    let (entries, errors) = tokenize(text);
    let mut r = Reader { entries, errors };
    for &(s, k, _, required) in SCHEMA {
        if required && r.raw(s, k).is_none() {
            r.errors.push(format!("missing required key `{s}.{k}`"));
        }
    }
    // Kind checks for keys that are only read conditionally.
    for &(s, k, kind, _) in SCHEMA {
        match kind {
            Kind::Float => {
                r.float(s, k, 0.0);
            }
            Kind::Int => {
                r.int(s, k, 0);
            }
            Kind::Bool => {
                r.boolean(s, k, false);
            }
            Kind::Text => {}
        }
    }
    let checked = r.errors.len();

    let circumradius = r.float("geometry", "circumradius", 3.0);
    let mesh = match r.choice("geometry", "mesh", &["octagon", "janus", "disk", "file"]).as_deref() {
        Some("octagon") => Some(MeshConfig::Octagon {
            circumradius,
            divisions: r.int("geometry", "divisions", 24),
        }),
        Some("janus") => Some(MeshConfig::Janus {
            circumradius: r.float("geometry", "circumradius", 3.5),
        }),
        Some("disk") => Some(MeshConfig::Disk {
            radius: r.need_float("geometry", "disk_radius", "mesh = disk"),
            ring_count: r.int("geometry", "ring_count", 32),
            outer: r.raw("geometry", "disk_outer").map(|_| r.float("geometry", "disk_outer", 0.0)),
            circumradius,
        }),
        Some("file") => match r.text("geometry", "mesh_file") {
            Some(p) => Some(MeshConfig::File(PathBuf::from(p))),
            None => {
                r.errors.push("missing required key `geometry.mesh_file` (mesh = file)".into());
                None
            }
        },
        _ => None,
    };
    let curve = match r.choice("geometry", "curve", &["circle", "ellipse", "rounded_square"]).as_deref() {
        Some("circle") => Some(CurveConfig::Circle {
            radius: r.need_float("geometry", "curve_radius", "curve = circle"),
        }),
        Some("ellipse") => Some(CurveConfig::Ellipse {
            a: r.need_float("geometry", "curve_a", "curve = ellipse"),
            b: r.need_float("geometry", "curve_b", "curve = ellipse"),
        }),
        Some("rounded_square") => Some(CurveConfig::RoundedSquare),
        _ => None,
    };
    let geometry_rest = (r.int("geometry", "refinements", 0), r.float("geometry", "curve_scale", 1.0));

    let k = r.float("physics", "k", 1.0);
    let index = match r
        .choice("physics", "index", &["free", "gaussian", "disk", "janus", "tagged"])
        .as_deref()
    {
        Some("free") => Some(IndexConfig::Free),
        Some("gaussian") => Some(IndexConfig::Gaussian {
            amplitude: r.float("physics", "gaussian_amplitude", 1.5),
            decay: r.float("physics", "gaussian_decay", 40.0),
            radius: r.float("physics", "gaussian_radius", 1.0),
        }),
        Some("disk") => Some(IndexConfig::Disk {
            n: r.need_float("physics", "disk_n", "index = disk"),
        }),
        Some("janus") => Some(IndexConfig::Janus {
            n1: r.float("physics", "janus_n1", 1.333),
            n2: r.float("physics", "janus_n2", 1.496),
        }),
        Some("tagged") => parse_tags(&mut r).map(IndexConfig::Tagged),
        _ => None,
    };
    let incident = match r.choice("physics", "incident", &["plane", "point"]).as_deref() {
        Some("point") => match r.floats("physics", "source", 2) {
            Some(p) => Some(IncidentConfig::Point { source: [p[0], p[1]] }),
            None => {
                if r.raw("physics", "source").is_none() {
                    r.errors.push("missing required key `physics.source` (incident = point)".into());
                }
                None
            }
        },
        Some(_) | None if r.raw("physics", "incident").map_or(true, |(v, _)| v == "plane") => {
            Some(IncidentConfig::Plane {
                angle_deg: r.float("physics", "angle_deg", 0.0),
            })
        }
        _ => None,
    };

    let degree = r.int("discretization", "degree", 2);
    let n = r.int("discretization", "n", 8);
    let gmres_tol = r.float("discretization", "gmres_tol", 1e-9);
    let max_iterations = r.int("discretization", "max_iterations", 500);
    let margin = r.float("discretization", "margin", 1.1);

    let grid = r.floats("output", "grid", 6).and_then(|g| {
        let whole = |x: f64| x >= 1.0 && x.fract() == 0.0;
        if whole(g[4]) && whole(g[5]) && g[0] < g[2] && g[1] < g[3] {
            Some(GridConfig {
                lower: [g[0], g[1]],
                upper: [g[2], g[3]],
                nx: g[4] as usize,
                ny: g[5] as usize,
            })
        } else {
            r.errors
                .push("`output.grid` must be `x0, y0, x1, y1, nx, ny` with x0 < x1, y0 < y1 and nx, ny >= 1".into());
            None
        }
    });
    let output = OutputConfig {
        dir: PathBuf::from(r.text("output", "dir").unwrap_or_else(|| "out".into())),
        angles: r.int("output", "angles", 1440),
        directions: r.int("output", "directions", 1000),
        grid,
        vtk: r.boolean("output", "vtk", false),
    };

    // Range checks only make sense for values that parsed.
    if r.errors.len() == checked {
        let mut bad = |ok: bool, msg: &str| {
            if !ok {
                r.errors.push(msg.to_string());
            }
        };
        bad(k > 0.0, "`physics.k` must be positive");
        bad((1..=3).contains(&degree), &format!("unsupported degree {degree} (expected 1, 2 or 3)"));
        bad(n >= 8, &format!("`discretization.n` must be at least 8, got {n}"));
        bad(gmres_tol > 0.0 && gmres_tol < 1.0, "`discretization.gmres_tol` must lie in (0, 1)");
        bad(max_iterations >= 1, "`discretization.max_iterations` must be at least 1");
        bad(margin > 1.0, "`discretization.margin` must exceed 1");
        bad(output.angles >= 8, "`output.angles` must be at least 8");
        bad(output.directions >= 8, "`output.directions` must be at least 8");
        bad(geometry_rest.1 > 0.0, "`geometry.curve_scale` must be positive");
        if let Some(MeshConfig::Octagon { divisions, .. }) = &mesh {
            bad(*divisions >= 1, "`geometry.divisions` must be at least 1");
        }
        if let (Some(IndexConfig::Disk { .. }), Some(m)) = (&index, &mesh) {
            bad(matches!(m, MeshConfig::Disk { .. }), "`index = disk` needs `mesh = disk`");
        }
        if let (Some(IndexConfig::Janus { .. }), Some(m)) = (&index, &mesh) {
            bad(matches!(m, MeshConfig::Janus { .. }), "`index = janus` needs `mesh = janus`");
        }
    }

    if !r.errors.is_empty() {
        return Err(Error::Config(r.errors));
    }
    let (Some(mesh), Some(curve), Some(index), Some(incident)) = (mesh, curve, index, incident) else {
        return Err(Error::Config(vec!["incomplete configuration".into()]));
    };
    Ok(RunConfig {
        geometry: GeometryConfig {
            mesh,
            refinements: geometry_rest.0,
            curve,
            curve_scale: geometry_rest.1,
        },
        physics: PhysicsConfig { k, index, incident },
        discretization: DiscretizationConfig {
            degree,
            n,
            gmres_tol,
            max_iterations,
            margin,
        },
        output,
    })
}

fn parse_tags(r: &mut Reader) -> Option<Vec<(u32, f64)>> {
    let Some((v, line)) = r.raw("physics", "tags") else {
        r.errors.push("missing required key `physics.tags` (index = tagged)".into());
        return None;
    };
    let parsed: Option<Vec<(u32, f64)>> = v
        .split(',')
        .map(|item| {
            let (t, n) = item.split_once(':')?;
            Some((t.trim().parse().ok()?, n.trim().parse().ok()?))
        })
        .collect();
    match parsed {
        Some(t) if !t.is_empty() && t.iter().all(|&(_, n): &(u32, f64)| n > 0.0) => Some(t),
        _ => {
            r.mismatch("physics", "tags", line, "`tag:index` pairs with positive indices", &v);
            None
        }
    }
}

/// Reads a configuration file. A relative `mesh_file` is taken relative to
/// the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let mut cfg = parse_config(&text)?;
    if let MeshConfig::File(p) = &mut cfg.geometry.mesh {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nmesh = octagon\ncurve = rounded_square\n\
        [physics]\nk = 5\nindex = free\n[discretization]\ndegree = 2\nn = 40\n";

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(
            c.geometry.mesh,
            MeshConfig::Octagon {
                circumradius: 3.0,
                divisions: 24
            }
        );
        assert_eq!(c.physics.incident, IncidentConfig::Plane { angle_deg: 0.0 });
        assert_eq!(c.discretization.gmres_tol, 1e-9);
        assert_eq!(c.discretization.max_iterations, 500);
        assert_eq!(c.output.angles, 1440);
        assert!(c.output.grid.is_none());
    }

    #[test]
    fn empty_file_lists_every_missing_key() {
        let e = errors("");
        let required = SCHEMA.iter().filter(|s| s.3).count();
        assert_eq!(e.len(), required);
        assert!(e.iter().all(|m| m.starts_with("missing required key")));
    }

    #[test]
    fn degree_four_is_unsupported() {
        let e = errors(&MINIMAL.replace("degree = 2", "degree = 4"));
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("unsupported degree"), "{e:?}");
    }

    #[test]
    fn unknown_keys_and_type_mismatches_are_all_reported() {
        let text = MINIMAL.replace("k = 5", "k = five\nwavelength = 2") + "[output]\nvtk = maybe\n";
        let e = errors(&text);
        assert_eq!(e.len(), 3, "{e:?}");
        assert!(e.iter().any(|m| m.contains("unknown key `wavelength`")));
        assert!(e.iter().any(|m| m.contains("`physics.k`")));
        assert!(e.iter().any(|m| m.contains("`output.vtk`")));
    }

    #[test]
    fn variant_keys_are_required() {
        let e = errors(&MINIMAL.replace("rounded_square", "ellipse").replace("index = free", "index = disk"));
        assert!(e.iter().any(|m| m.contains("curve_a")));
        assert!(e.iter().any(|m| m.contains("curve_b")));
        assert!(e.iter().any(|m| m.contains("disk_n")));
    }

    #[test]
    fn range_checks() {
        let e = errors(&MINIMAL.replace("n = 40", "n = 4").replace("k = 5", "k = -1"));
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn tags_grid_and_point_source() {
        let text = MINIMAL.replace("index = free", "index = tagged\ntags = 1:1.333, 2:1.496\nincident = point\nsource = 0.5, -0.25")
            + "[output]\ngrid = -4, -4, 4, 4, 81, 81\nvtk = true\n";
        let c = parse_config(&text).unwrap();
        assert_eq!(c.physics.index, IndexConfig::Tagged(vec![(1, 1.333), (2, 1.496)]));
        assert_eq!(c.physics.incident, IncidentConfig::Point { source: [0.5, -0.25] });
        let g = c.output.grid.unwrap();
        assert_eq!((g.nx, g.ny, g.lower, g.upper), (81, 81, [-4.0, -4.0], [4.0, 4.0]));
        assert!(c.output.vtk);
    }

    #[test]
    fn comments_and_duplicates() {
        let c = parse_config(&format!("# header\n{MINIMAL}; trailing\n")).unwrap();
        assert_eq!(c.physics.k, 5.0);
        let e = errors(&format!("{MINIMAL}[physics]\nk = 6\n"));
        assert!(e[0].contains("duplicate key"));
    }
}
