//! Mountain-pass drivers on energy surfaces.

use dispersia::energy::Landscape;
use dispersia::pathopt::fixtures::TwoParameterToy;
use dispersia::pathopt::{
    bounded_minmax_path, minmax_optimize, negativity_at_pseudomin, select_l_cut, sublevel_connectivity,
};
use dispersia::{Error, PathOnConfigSpace, Result};

use super::{Outcome, Row};
use crate::cli::{BoundpathArgs, MountainpassArgs, NegativityArgs, SublevelArgs};
use crate::inputs;

pub fn mountainpass(args: &MountainpassArgs, seed: u64) -> Result<Outcome> {
    let a = inputs::configuration(&args.tau0)?;
    let b = inputs::configuration(&args.tau1)?;
    let surface;
    let landscape: &dyn Landscape<f64> = if args.toy {
        &TwoParameterToy
    } else {
        let path = args.surface.as_ref().ok_or_else(|| Error::Validation("--surface or --toy is required".into()))?;
        surface = inputs::surface(path)?;
        &surface
    };
    let r = minmax_optimize(landscape, &a, &b, args.nodes, seed)?;
    let rows = r.sweep_levels.iter().enumerate().map(|(i, v)| Row::new("sweep_level", i as f64, *v)).collect();
    Outcome::new(r.converged, &r, rows)
}

pub fn boundpath(args: &BoundpathArgs, seed: u64) -> Result<Outcome> {
    let surface = inputs::surface(&args.surface)?;
    let l_cut = match args.l_cut {
        Some(l) => l,
        None => select_l_cut(&surface, args.delta)?,
    };
    let path = match (&args.path, &args.tau0, &args.tau1) {
        (Some(p), _, _) => inputs::path(p)?,
        (None, Some(a), Some(b)) => {
            let a = inputs::configuration(a)?;
            let b = inputs::configuration(b)?;
            PathOnConfigSpace::geodesic(&a, &b, args.nodes, seed)?
        }
        _ => return Err(Error::Validation("either --path or both --tau0 and --tau1 are required".into())),
    };
    let path = match args.lift {
        Some(f) => {
            let mut nodes = path.into_nodes();
            let mid = nodes.len() / 2;
            nodes[mid] = nodes[mid].with_l(f * l_cut)?;
            PathOnConfigSpace::new(nodes)?
        }
        None => path,
    };
    let report = bounded_minmax_path(&surface, &path, l_cut, seed)?;
    let rows = report
        .path
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, c)| Row::new("node_L", i as f64, c.l()))
        .collect();
    Outcome::new(report.bound_holds, &report, rows)
}

pub fn negativity(args: &NegativityArgs, seed: u64) -> Result<Outcome> {
    let rho1 = inputs::density(&args.rho1)?;
    let rho2 = inputs::density(&args.rho2)?;
    let r = negativity_at_pseudomin(&rho1, &rho2, args.n, args.m, args.delta, args.trials, seed)?;
    let rows = r.endpoint_values.iter().enumerate().map(|(i, v)| Row::new("endpoint", i as f64, *v)).collect();
    Outcome::new(r.passed, &r, rows)
}

pub fn sublevel(args: &SublevelArgs, seed: u64) -> Result<Outcome> {
    let rho1 = inputs::density(&args.rho1)?;
    let rho2 = inputs::density(&args.rho2)?;
    let r = sublevel_connectivity(&rho1, &rho2, args.n, args.m, args.delta, args.samples, seed)?;
    let rows = r.component_sizes.iter().enumerate().map(|(i, s)| Row::new("component_size", i as f64, *s as f64)).collect();
    Outcome::new(r.passed, &r, rows)
}
