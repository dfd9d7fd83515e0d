use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;
use wca::assign::{alternate, AlternatingConfig};
use wca::coreset::{build_coreset, build_epsilon_net, CoresetConfig};
use wca::io::{
    coreset_from_json, coreset_to_json, read_clustering, read_points, read_sites, write_clustering,
    write_points, write_sites, ProblemConfig,
};
use wca::verify::{
    check_approx_preservation, check_centroid_form, check_coreset_properties, sensitivity_example,
    Instance, Report,
};
use wca::{
    centroids, cost, extract_diagram, solve_assignment, Clustering, NormFamily, SiteSet,
    WeightBounds, WeightedDataSet,
};

pub fn load_points(path: &Path) -> Result<WeightedDataSet<f64>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_points(f).with_context(|| format!("reading points from {}", path.display()))
}

pub fn load_config(path: Option<&Path>) -> Result<ProblemConfig> {
    match path {
        None => Ok(ProblemConfig::default()),
        Some(p) => {
            let s = fs::read_to_string(p).with_context(|| format!("opening {}", p.display()))?;
            ProblemConfig::from_json(&s).with_context(|| format!("reading {}", p.display()))
        }
    }
}

/// Bounds and norms for `x`, with `--balanced` overriding the config's `kappa`.
pub fn problem(
    x: &WeightedDataSet<f64>,
    cfg: &ProblemConfig,
    k: Option<usize>,
    balanced: Option<f64>,
) -> Result<(usize, WeightBounds<f64>, NormFamily<f64>)> {
    let k = cfg.resolve_k(k)?;
    let bounds = match balanced {
        Some(slack) => WeightBounds::balanced(k, x.total_weight(), slack),
        None => cfg.bounds(k)?,
    };
    let norms = cfg.norm_family(k, x.dim())?;
    bounds.check_feasible(x.total_weight())?;
    Ok((k, bounds, norms))
}

fn out_dir(out: Option<&Path>) -> Result<Option<PathBuf>> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(out.map(Path::to_path_buf))
}

fn create(dir: &Path, name: &str) -> Result<fs::File> {
    let p = dir.join(name);
    fs::File::create(&p).with_context(|| format!("creating {}", p.display()))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
}

pub struct AssignArgs<'a> {
    pub points: &'a Path,
    pub sites: &'a Path,
    pub config: Option<&'a Path>,
    pub balanced: Option<f64>,
    pub diagram: bool,
    pub out: Option<&'a Path>,
}

/// LP-optimal clustering of the points to fixed sites.
pub fn cmd_assign(a: &AssignArgs) -> Result<String> {
    let x = load_points(a.points)?;
    let f = fs::File::open(a.sites).with_context(|| format!("opening {}", a.sites.display()))?;
    let s = read_sites(f).with_context(|| format!("reading sites from {}", a.sites.display()))?;
    let cfg = load_config(a.config)?;
    let (_, bounds, norms) = problem(&x, &cfg, Some(s.len()), a.balanced)?;
    let sol = solve_assignment(&x, &s, &norms, &bounds)?;
    let mut summary = format!(
        "points {}\nclusters {}\ncost {:.17e}\nduality gap {:.3e}\ncluster weights {:?}\n",
        x.len(),
        s.len(),
        sol.cost,
        sol.certificate.relative_gap(),
        sol.clustering.cluster_weights(&x)
    );
    let dir = out_dir(a.out)?;
    if let Some(dir) = &dir {
        write_clustering(create(dir, "clustering.csv")?, &sol.clustering)?;
        let doc = json!({ "cost": sol.cost, "certificate": sol.certificate });
        write_text(
            dir,
            "certificate.json",
            &serde_json::to_string_pretty(&doc)?,
        )?;
    }
    if a.diagram {
        let pair = extract_diagram(&x, &s, &norms, &bounds)?;
        let class = wca::check_compatibility(&pair.diagram, &pair.clustering, &x);
        summary.push_str(&format!("diagram {}\n", serde_json::to_string(&class)?));
        if let Some(dir) = &dir {
            let doc = json!({
                "sites": pair.diagram.sites().to_vecs(),
                "sizes": pair.diagram.sizes(),
                "A": pair.diagram.norms().matrices().iter().map(|m| m.rows()).collect::<Vec<_>>(),
                "compatibility": class,
            });
            write_text(dir, "diagram.json", &serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(summary)
}

pub struct BuildArgs<'a> {
    pub points: &'a Path,
    pub k: usize,
    pub eps: f64,
    pub config: Option<&'a Path>,
    pub coreset: CoresetConfig,
    pub out: Option<&'a Path>,
}

pub fn cmd_build_coreset(a: &BuildArgs) -> Result<String> {
    let x = load_points(a.points)?;
    let cfg = load_config(a.config)?;
    let norms = cfg.norm_family(a.k, x.dim())?;
    let start = Instant::now();
    let c = build_coreset(&x, a.k, a.eps, &norms, &a.coreset)?;
    let secs = start.elapsed().as_secs_f64();
    let log = |name: &str| c.log_value(name).unwrap_or(f64::NAN);
    let summary = format!(
        "points {}\ncoreset size {}\nsize bound (2·ALG/V̄ + k·|𝓛|) {:.6e}\nsize bound (closed form) {:.6e}\n\
         ALG {:.6e}\nε₀ {:.6e}\nV̄ {:.6e}\nlines {}\nΔ⁺ {:.6e}\nΔ⁻ {:.6e}\nδ {}\nε {}\nseconds {:.3}\n",
        x.len(),
        c.len(),
        log("size_bound"),
        log("closed_form_bound"),
        log("alg"),
        log("eps0"),
        log("v_bar"),
        log("lines"),
        c.delta_plus(),
        c.delta_minus(),
        c.delta(),
        c.eps(),
        secs
    );
    if let Some(dir) = out_dir(a.out)? {
        write_text(&dir, "coreset.json", &coreset_to_json(&c))?;
    }
    Ok(summary)
}

/// Settings of [`cluster_pipeline`].
#[derive(Debug, Clone)]
pub struct ClusterOptions {
    pub k: usize,
    pub eps: f64,
    pub bounds: WeightBounds<f64>,
    pub norms: NormFamily<f64>,
    pub coreset: CoresetConfig,
    /// Random starts of the alternating heuristic on the coreset.
    pub starts: usize,
    /// Move the sites to the centroids of the extended clustering.
    pub reoptimize: bool,
}

/// Result of [`cluster_pipeline`].
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub coreset_size: usize,
    /// Cost of the best coreset clustering at its sites.
    pub coreset_cost: f64,
    /// Cost of the extended clustering on the data at the coreset sites.
    pub extended_cost: f64,
    /// Cost after moving the sites to the extended clustering's centroids.
    pub reoptimized_cost: Option<f64>,
    pub clustering: Clustering<f64>,
    pub sites: SiteSet<f64>,
    pub seconds: f64,
}

impl ClusterOutcome {
    /// The final full-data cost.
    pub fn cost(&self) -> f64 {
        self.reoptimized_cost.unwrap_or(self.extended_cost)
    }
}

/// Coreset at `ε/3`, alternating sites and assignments on it, extension to
/// the data and optionally one site update on the data.
pub fn cluster_pipeline(x: &WeightedDataSet<f64>, o: &ClusterOptions) -> Result<ClusterOutcome> {
    let start = Instant::now();
    let c = build_coreset(x, o.k, o.eps / 3.0, &o.norms, &o.coreset)?;
    let alt = AlternatingConfig {
        starts: o.starts,
        seed: o.coreset.seed,
        ..AlternatingConfig::default()
    };
    let best = alternate(c.points(), &o.norms, &o.bounds, &[], &alt)?;
    let clustering = c.extend(&best.clustering)?;
    let extended_cost = cost(x, &clustering, &best.sites, &o.norms)?;
    let (sites, reoptimized_cost) = if o.reoptimize {
        let mut s = centroids(x, &clustering)?.to_vecs();
        for (i, site) in s.iter_mut().enumerate() {
            if clustering.is_void(i, x) {
                *site = best.sites.site(i).to_vec();
            }
        }
        let s = SiteSet::new(&s)?;
        let re = cost(x, &clustering, &s, &o.norms)?;
        (s, Some(re))
    } else {
        (best.sites.clone(), None)
    };
    Ok(ClusterOutcome {
        coreset_size: c.len(),
        coreset_cost: best.cost,
        extended_cost,
        reoptimized_cost,
        clustering,
        sites,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub struct ClusterArgs<'a> {
    pub points: &'a Path,
    pub k: usize,
    pub eps: f64,
    pub config: Option<&'a Path>,
    pub balanced: Option<f64>,
    pub coreset: CoresetConfig,
    pub starts: usize,
    pub reoptimize: bool,
    pub out: Option<&'a Path>,
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<String> {
    let x = load_points(a.points)?;
    let cfg = load_config(a.config)?;
    let (k, bounds, norms) = problem(&x, &cfg, Some(a.k), a.balanced)?;
    let o = ClusterOptions {
        k,
        eps: a.eps,
        bounds,
        norms,
        coreset: a.coreset,
        starts: a.starts,
        reoptimize: a.reoptimize,
    };
    let r = cluster_pipeline(&x, &o)?;
    let mut summary = format!(
        "points {}\ncoreset size {}\ncoreset cost {:.17e}\nextended cost {:.17e}\n",
        x.len(),
        r.coreset_size,
        r.coreset_cost,
        r.extended_cost
    );
    if let Some(c) = r.reoptimized_cost {
        summary.push_str(&format!("re-optimized cost {c:.17e}\n"));
    }
    summary.push_str(&format!(
        "cluster weights {:?}\nseconds {:.3}\n",
        r.clustering.cluster_weights(&x),
        r.seconds
    ));
    if let Some(dir) = out_dir(a.out)? {
        write_clustering(create(&dir, "clustering.csv")?, &r.clustering)?;
        write_sites(create(&dir, "sites.csv")?, &r.sites)?;
        let doc = json!({
            "coreset_size": r.coreset_size,
            "coreset_cost": r.coreset_cost,
            "extended_cost": r.extended_cost,
            "reoptimized_cost": r.reoptimized_cost,
            "seconds": r.seconds,
        });
        write_text(&dir, "summary.json", &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(summary)
}

pub struct VerifyArgs<'a> {
    pub points: &'a Path,
    pub coreset: &'a Path,
    pub k: Option<usize>,
    pub config: Option<&'a Path>,
    pub balanced: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<&'a Path>,
}

/// Property reports for a coreset file; returns the summary and whether every check passed.
pub fn cmd_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let x = load_points(a.points)?;
    let text = fs::read_to_string(a.coreset)
        .with_context(|| format!("opening {}", a.coreset.display()))?;
    let c = coreset_from_json(&text).with_context(|| format!("reading {}", a.coreset.display()))?;
    let cfg = load_config(a.config)?;
    let (_, bounds, norms) = problem(&x, &cfg, a.k, a.balanced)?;
    let inst = Instance::new(x, norms, bounds)?;
    let mut reports: Vec<(&str, String, String, bool)> = Vec::new();
    let props = check_coreset_properties(&inst, &c, a.trials, a.seed)?;
    reports.push((
        "properties",
        props.to_json(),
        props.to_markdown(),
        props.passed(),
    ));
    if inst.k <= 3 && inst.x.len() <= 60 {
        let cf = check_centroid_form(&inst, &c, a.trials, a.seed)?;
        reports.push(("centroid_form", cf.to_json(), cf.to_markdown(), cf.passed()));
    }
    let eps = 3.0 * c.eps();
    if eps > 0.0 && eps <= 1.0 {
        let ap = check_approx_preservation(&inst, &c, eps, c.delta().max(2.0), a.trials, a.seed)?;
        reports.push((
            "approx_preservation",
            ap.to_json(),
            ap.to_markdown(),
            ap.passed(),
        ));
    }
    let passed = reports.iter().all(|r| r.3);
    let mut summary = String::new();
    for (name, _, md, ok) in &reports {
        summary.push_str(&format!("{name}: {}\n", if *ok { "pass" } else { "fail" }));
        if !ok {
            summary.push_str(md);
        }
    }
    if let Some(dir) = out_dir(a.out)? {
        for (name, js, md, _) in &reports {
            write_text(&dir, &format!("{name}.json"), js)?;
            write_text(&dir, &format!("{name}.md"), md)?;
        }
    }
    Ok((summary, passed))
}

/// The circle instance report; `emit` also writes the instance and probe files.
pub fn cmd_sensitivity_demo(n: usize, r: f64, emit: Option<&Path>) -> Result<(String, bool)> {
    let e = sensitivity_example(n, r)?;
    if let Some(dir) = out_dir(emit)? {
        write_points(create(&dir, "points.csv")?, &e.instance.x)?;
        let cfg = ProblemConfig {
            k: Some(2),
            kappa: Some(
                (0..2)
                    .map(|i| {
                        let (lo, hi) = (e.instance.bounds.lower()[i], e.instance.bounds.upper()[i]);
                        [
                            wca::io::BoundValue::from_value(lo),
                            wca::io::BoundValue::from_value(hi),
                        ]
                    })
                    .collect(),
            ),
            norms: Default::default(),
        };
        write_text(&dir, "config.json", &cfg.to_json())?;
        for (j, s) in e.probes.iter().enumerate() {
            write_sites(create(&dir, &format!("sites_{j}.csv"))?, s)?;
        }
        write_text(&dir, "report.json", &e.to_json())?;
        write_text(&dir, "report.md", &e.to_markdown())?;
    }
    Ok((e.to_markdown(), e.passed()))
}

pub fn cmd_net(eps0: f64, d: usize, out: Option<&Path>) -> Result<String> {
    let net = build_epsilon_net(eps0, d)?;
    if let Some(dir) = out_dir(out)? {
        let mut w = csv::Writer::from_writer(create(&dir, "net.csv")?);
        let header: Vec<String> = (0..d).map(|a| format!("q{a}")).collect();
        w.write_record(&header)?;
        for q in 0..net.len() {
            w.write_record(net.direction(q).iter().map(|v: &f64| v.to_string()))?;
        }
        w.flush()?;
    }
    Ok(format!(
        "dimension {d}\nε₀ {eps0}\ngrid intervals per facet edge {}\ndirections {}\n",
        net.resolution(),
        net.len()
    ))
}

pub struct PlotArgs<'a> {
    pub points: &'a Path,
    pub clustering: Option<&'a Path>,
    pub sites: Option<&'a Path>,
    pub diagram: Option<&'a Path>,
    pub out: &'a Path,
}

pub fn cmd_plot(a: &PlotArgs) -> Result<String> {
    let x = load_points(a.points)?;
    if x.dim() != 2 {
        bail!(
            "plots need 2-dimensional points, got dimension {}; project the data to two coordinates first",
            x.dim()
        );
    }
    let clustering = match a.clustering {
        Some(p) => {
            let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Some(read_clustering(f, None, Some(x.len()))?)
        }
        None => None,
    };
    let sites = match a.sites {
        Some(p) => {
            let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Some(read_sites(f)?)
        }
        None => None,
    };
    let diagram = match a.diagram {
        Some(p) => Some(crate::plot::read_diagram(p)?),
        None => None,
    };
    let svg = crate::plot::render(&x, clustering.as_ref(), sites.as_ref(), diagram.as_ref())?;
    fs::write(a.out, &svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(format!("wrote {} ({} bytes)\n", a.out.display(), svg.len()))
}
