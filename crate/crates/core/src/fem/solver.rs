use super::element::{element_gradient, element_hessian, project_psd, RestElement};
use super::sparse::{norm, pcg, project, BlockCsr, CgOutcome};
use super::{energy_of, region, rest_elements, BCSpec, FemError, MaterialParams, VertexField};
use crate::mesh::{extract_surface, TetMesh};
use crate::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Converged when the free-DOF residual is below `rel_tol` times the
    /// load scale.
    pub rel_tol: f64,
    /// Newton iterations per load step.
    pub max_newton_iterations: usize,
    pub max_cg_iterations: usize,
    /// Smallest load increment tried before giving up.
    pub min_load_increment: f64,
    /// Newton iterations allowed over all load steps of one solve.
    pub max_total_newton_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_newton_iterations: 50,
            max_cg_iterations: 4000,
            min_load_increment: 1.0 / 64.0,
            max_total_newton_iterations: 200,
        }
    }
}

/// Nodal loads and prescribed displacements on a mesh.
#[derive(Clone, Debug)]
pub struct StaticProblem<'a> {
    pub mesh: &'a TetMesh,
    pub material: MaterialParams,
    /// Prescribed displacement per fixed vertex.
    pub fixed: Vec<(u32, Vec3)>,
    /// External force per vertex, Newtons.
    pub nodal_forces: Vec<Vec3>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub newton_iterations: usize,
    pub load_steps: usize,
    /// Final free-DOF residual over the load scale.
    pub residual_ratio: f64,
    /// Objective (strain energy minus external work) after each accepted
    /// Newton step, one list per load step.
    pub objective_history: Vec<Vec<f64>>,
    /// Newton steps that needed the PSD-projected tangent.
    pub projected_steps: usize,
}

struct System<'a> {
    elements: Vec<RestElement>,
    lame: super::element::Lame,
    fixed_mask: Vec<bool>,
    pattern: BlockCsr,
    problem: &'a StaticProblem<'a>,
}

impl System<'_> {
    fn gradient(&self, u: &[Vec3]) -> Vec<Vec3> {
        let mut g = vec![Vec3::zeros(); u.len()];
        for el in &self.elements {
            let ge = element_gradient(el, &el.deformation_gradient(u), self.lame);
            for a in 0..4 {
                g[el.nodes[a] as usize] += ge[a];
            }
        }
        g
    }

    /// `dW/du - load * f`, with fixed DOFs zeroed.
    fn residual(&self, u: &[Vec3], load: f64) -> Vec<Vec3> {
        let mut r = self.gradient(u);
        for (ri, fi) in r.iter_mut().zip(&self.problem.nodal_forces) {
            *ri -= fi * load;
        }
        project(&mut r, &self.fixed_mask);
        r
    }

    fn objective(&self, u: &[Vec3], load: f64) -> f64 {
        match energy_of(&self.elements, u, self.lame) {
            Ok(w) => {
                let work: f64 = u.iter().zip(&self.problem.nodal_forces).map(|(a, b)| a.dot(b)).sum();
                w - load * work
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn assemble(&mut self, u: &[Vec3], psd: bool) {
        self.pattern.clear();
        for el in &self.elements {
            let mut k = element_hessian(el, &el.deformation_gradient(u), self.lame);
            if psd {
                k = project_psd(&k);
            }
            self.pattern.add_element(&el.nodes, &k);
        }
    }
}

fn check_fixed_rank(mesh: &TetMesh, fixed: &[(u32, Vec3)]) -> Result<(), FemError> {
    if fixed.is_empty() {
        return Err(FemError::SingularSystem("no fixed vertices".into()));
    }
    let p0 = mesh.vertices[fixed[0].0 as usize];
    let extent = fixed
        .iter()
        .map(|&(v, _)| (mesh.vertices[v as usize] - p0).norm())
        .fold(0.0, f64::max);
    let Some(&(far, _)) = fixed
        .iter()
        .max_by(|a, b| {
            let da = (mesh.vertices[a.0 as usize] - p0).norm();
            let db = (mesh.vertices[b.0 as usize] - p0).norm();
            da.total_cmp(&db)
        })
    else {
        unreachable!()
    };
    let axis = mesh.vertices[far as usize] - p0;
    let off_axis = fixed
        .iter()
        .map(|&(v, _)| axis.cross(&(mesh.vertices[v as usize] - p0)).norm())
        .fold(0.0, f64::max);
    if extent == 0.0 || off_axis <= 1e-9 * extent * extent {
        return Err(FemError::SingularSystem(
            "fixed vertices are collinear; rigid rotations remain free".into(),
        ));
    }
    Ok(())
}

/// Minimizes strain energy minus external work with Newton's method,
/// backtracking line search and adaptive load stepping.
pub fn solve_problem(problem: &StaticProblem<'_>, settings: &SolverSettings) -> Result<(VertexField, SolveStats), FemError> {
    let mesh = problem.mesh;
    let n = mesh.vertices.len();
    problem.material.validate()?;
    if problem.nodal_forces.len() != n {
        return Err(FemError::InvalidInput("one nodal force per vertex required".into()));
    }
    check_fixed_rank(mesh, &problem.fixed)?;
    let mut fixed_mask = vec![false; n];
    for &(v, _) in &problem.fixed {
        fixed_mask[v as usize] = true;
    }
    let mut sys = System {
        elements: rest_elements(mesh)?,
        lame: problem.material.lame(),
        fixed_mask,
        pattern: BlockCsr::from_tets(n, &mesh.tets),
        problem,
    };

    let apply_fixed = |u: &mut [Vec3], load: f64| {
        for &(v, val) in &problem.fixed {
            u[v as usize] = val * load;
        }
    };

    // Load scale: external force, or the residual the prescribed
    // displacements create when nothing else moves.
    let mut u0 = vec![Vec3::zeros(); n];
    apply_fixed(&mut u0, 1.0);
    let scale = {
        let mut f = problem.nodal_forces.clone();
        project(&mut f, &sys.fixed_mask);
        norm(&f).max(norm(&sys.residual(&u0, 1.0)))
    };
    let mut stats = SolveStats::default();
    let mut u = vec![Vec3::zeros(); n];
    if scale == 0.0 {
        apply_fixed(&mut u, 1.0);
        return Ok((VertexField(u), stats));
    }

    let mut done = 0.0;
    let mut step: f64 = 1.0;
    while done < 1.0 {
        let target = (done + step).min(1.0);
        let last = target >= 1.0;
        let tol = if last { settings.rel_tol } else { settings.rel_tol.max(1e-3) } * scale;
        let mut trial = u.clone();
        apply_fixed(&mut trial, target);
        match newton(&mut sys, &mut trial, target, tol, settings, &mut stats) {
            Ok(history) => {
                u = trial;
                done = target;
                stats.load_steps += 1;
                stats.objective_history.push(history);
                step = (step * 2.0).min(1.0);
            }
            Err(e) => {
                step *= 0.5;
                if step < settings.min_load_increment || stats.newton_iterations >= settings.max_total_newton_iterations {
                    return Err(e);
                }
            }
        }
    }
    stats.residual_ratio = norm(&sys.residual(&u, 1.0)) / scale;
    Ok((VertexField(u), stats))
}

fn newton(
    sys: &mut System<'_>,
    u: &mut Vec<Vec3>,
    load: f64,
    tol: f64,
    settings: &SolverSettings,
    stats: &mut SolveStats,
) -> Result<Vec<f64>, FemError> {
    let mut objective = sys.objective(u, load);
    if !objective.is_finite() {
        return Err(FemError::NonConvergence("prescribed displacements invert elements".into()));
    }
    let mut history = vec![objective];
    let mut r = sys.residual(u, load);
    let r_first = norm(&r);
    let mut d = Vec::new();
    for _ in 0..settings.max_newton_iterations {
        let r_norm = norm(&r);
        if r_norm <= tol {
            return Ok(history);
        }
        if stats.newton_iterations >= settings.max_total_newton_iterations {
            break;
        }
        stats.newton_iterations += 1;
        let rhs: Vec<Vec3> = r.iter().map(|x| -x).collect();
        // Inexact Newton forcing term.
        let eta = (r_norm / r_first).min(0.1).max(1e-12);
        sys.assemble(u, false);
        let mut outcome = pcg(&sys.pattern, &rhs, &sys.fixed_mask, eta, settings.max_cg_iterations, &mut d);
        if !matches!(outcome, CgOutcome::Converged { .. }) {
            stats.projected_steps += 1;
            sys.assemble(u, true);
            outcome = pcg(&sys.pattern, &rhs, &sys.fixed_mask, eta, settings.max_cg_iterations, &mut d);
        }
        let mut slope: f64 = r.iter().zip(&d).map(|(a, b)| a.dot(b)).sum();
        if matches!(outcome, CgOutcome::NegativeCurvature) || !(slope < 0.0) {
            // Fall back to steepest descent.
            d = rhs;
            slope = -r_norm * r_norm;
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        let mut trial = u.clone();
        for _ in 0..40 {
            for i in 0..u.len() {
                trial[i] = u[i] + d[i] * alpha;
            }
            let obj = sys.objective(&trial, load);
            if obj <= objective + 1e-4 * alpha * slope {
                accepted = Some((obj, None));
                break;
            }
            // Near the solution the objective change drowns in roundoff;
            // accept when the residual drops instead.
            if obj.is_finite() && (obj - objective).abs() <= 1e-10 * objective.abs().max(f64::MIN_POSITIVE) {
                let r_try = sys.residual(&trial, load);
                if norm(&r_try) < r_norm {
                    accepted = Some((obj.min(objective), Some(r_try)));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((obj, r_try)) = accepted else {
            return Err(FemError::NonConvergence("line search failed".into()));
        };
        std::mem::swap(u, &mut trial);
        objective = obj;
        history.push(objective);
        r = r_try.unwrap_or_else(|| sys.residual(u, load));
    }
    if norm(&r) <= tol {
        return Ok(history);
    }
    Err(FemError::NonConvergence(format!(
        "residual {:.3e} above {:.3e} after {} iterations",
        norm(&r),
        tol,
        settings.max_newton_iterations
    )))
}

/// Vertex forces summing to `total`, split over `region` in proportion to
/// each vertex's share of the adjacent triangle area.
pub fn area_weighted_loads(surface: &crate::mesh::SurfaceMesh, region: &[u32], total: Vec3, n_vertices: usize) -> Vec<Vec3> {
    let areas = surface.vertex_areas();
    let sum: f64 = region.iter().map(|&v| areas[v as usize]).sum();
    let mut f = vec![Vec3::zeros(); n_vertices];
    if sum > 0.0 {
        for &v in region {
            f[surface.source_ids[v as usize] as usize] += total * (areas[v as usize] / sum);
        }
    }
    f
}

/// Solves for the displacement under `bc`: zero displacement on the
/// fixed patch and the total force spread over the loaded patch as an
/// area-weighted traction.
pub fn solve_static(
    mesh: &TetMesh,
    material: &MaterialParams,
    bc: &BCSpec,
    settings: &SolverSettings,
) -> Result<(VertexField, SolveStats), FemError> {
    let surface = extract_surface(mesh).map_err(|e| FemError::InvalidInput(e.to_string()))?;
    let ns = surface.vertices.len() as u32;
    if bc.zero_region.seed_vertex >= ns || bc.force_region.seed_vertex >= ns {
        return Err(FemError::InvalidInput("region seed is not a surface vertex".into()));
    }
    let zero = region::select_surface_region(&surface, bc.zero_region.seed_vertex, bc.zero_region.radius);
    if zero.is_empty() {
        return Err(FemError::SingularSystem("zero-displacement region is empty".into()));
    }
    let loaded = region::select_surface_region(&surface, bc.force_region.seed_vertex, bc.force_region.radius);
    let problem = StaticProblem {
        mesh,
        material: *material,
        fixed: zero.iter().map(|&v| (surface.source_ids[v as usize], Vec3::zeros())).collect(),
        nodal_forces: area_weighted_loads(&surface, &loaded, bc.force, mesh.vertices.len()),
    };
    solve_problem(&problem, settings)
}
