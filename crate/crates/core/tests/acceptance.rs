//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use gvd::affine_md::{minimization_diagram_with, order_k_diagram, phi, MdOptions};
use gvd::hull::{choose_bounding_box, BoundingBox};
use gvd::lie_geometry::{
    lie_product, plane_to_lie, point_to_lie, sphere_to_lie, EuclideanPoint, OrientedPlane, OrientedSphere,
};
use gvd::oracle::{delaunay_vertices_bruteforce, k_smallest, label, label_margin, max_radius, md_margin, GridSpec};
use gvd::quadric::{compute_diagram_in_box, DiagramOptions, GeneralizedDiagram};
use gvd::{inequality_for_site, quadratic_to_functional, DataSet, QuadraticFunction, Site, EPS_PRED};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// pinned tolerances
const QUADRIC_TOL: f64 = 1e-10;
const VERTEX_TOL: f64 = 1e-7;
const GRID_AGREEMENT: f64 = 0.999;
const RADICAL_TOL: f64 = 1e-6;
const FACTOR_TOL: f64 = 1e-10;
const ROBUST_MARGIN: f64 = 10.0 * EPS_PRED;
const SCALING_FACTOR: f64 = 4.0;

struct Outcome {
    pass: bool,
    detail: String,
    limit: Option<Duration>,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_points(r: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n).map(|_| [r.gen::<f64>(), r.gen::<f64>()]).collect()
}

fn outside_points(ps: &[[f64; 2]]) -> DataSet {
    let sites = ps
        .iter()
        .enumerate()
        .map(|(i, p)| Site::point_outside(i + 1, p).unwrap())
        .collect();
    DataSet::new(sites, 2).unwrap()
}

fn diagram(ds: &DataSet) -> GeneralizedDiagram {
    let opts = DiagramOptions::default();
    compute_diagram_in_box(ds, choose_bounding_box(ds.sites(), opts.margin), &opts).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Fraction of margin-robust grid points on which the engine agrees with the oracle.
fn grid_agreement(ds: &DataSet, g: &GeneralizedDiagram, n: usize) -> (usize, usize) {
    let pts = GridSpec {
        n,
        half_width: g.bbox.half_width,
        dim: 2,
    }
    .points();
    let mut robust = 0;
    let mut agree = 0;
    for x in &pts {
        if label_margin(ds, x) <= ROBUST_MARGIN {
            continue;
        }
        robust += 1;
        agree += (g.cell_at(x) == label(ds, x)) as usize;
    }
    (agree, robust)
}

fn criterion_1() -> Outcome {
    let s = OrientedSphere::new(vec![3.0, 1.0], 5.0).unwrap();
    let lie = sphere_to_lie(&s).coords;
    let site = Site::power_sphere(1, &[3.0, 1.0], 5.0).unwrap();
    let ineq = inequality_for_site(&site);
    let coords_ok = lie == vec![-7.0, 8.0, 3.0, 1.0, 5.0];
    let functional_ok = ineq.coeffs == vec![7.0, 8.0, 3.0, 1.0, -5.0] && ineq.bound == 0.0;
    Outcome {
        pass: coords_ok && functional_ok,
        detail: format!(
            "lie coords {lie:?} ({}), functional {:?} <= {} ({})",
            if coords_ok { "ok" } else { "wrong" },
            ineq.coeffs,
            ineq.bound,
            if functional_ok { "ok" } else { "expected [7, 8, 3, 1, -5]" }
        ),
        limit: Some(Duration::from_millis(1)),
    }
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let c: Vec<f64> = (0..3).map(|_| r.gen_range(-100.0..100.0)).collect();
        let x = match i % 3 {
            0 => point_to_lie(&EuclideanPoint::new(c).unwrap()),
            1 => sphere_to_lie(&OrientedSphere::new(c, r.gen_range(-50.0..50.0)).unwrap()),
            _ => plane_to_lie(&OrientedPlane::from_unnormalized(c, r.gen_range(-100.0..100.0)).unwrap()),
        };
        let q = lie_product(&x.coords, &x.coords).unwrap();
        let n2: f64 = x.coords.iter().map(|v| v * v).sum();
        worst = worst.max(q.abs() / n2.max(1.0));
    }
    Outcome {
        pass: worst <= QUADRIC_TOL,
        detail: format!("worst |<x,x>|/max(1,|x|^2) = {worst:.3e} over 10^4 samples"),
        limit: Some(Duration::from_secs(1)),
    }
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut vertex_failures = 0;
    let mut worst = 0.0f64;
    let (mut agree, mut robust) = (0, 0);
    for _ in 0..100 {
        let n = r.gen_range(3..=12);
        let ds = outside_points(&random_points(&mut r, n));
        let g = diagram(&ds);
        let b = g.bbox.half_width;
        let expected: Vec<_> = delaunay_vertices_bruteforce(&ds)
            .into_iter()
            .filter(|e| e.center.iter().all(|c| c.abs() < b - 1e-6))
            .collect();
        let mut ok = expected.len() == g.vertices.len();
        for e in &expected {
            match g
                .vertices
                .iter()
                .find(|v| max_abs_diff(&v.center, &e.center) <= VERTEX_TOL && v.tight_sites == e.sites)
            {
                Some(v) => worst = worst.max(max_abs_diff(&v.center, &e.center)),
                None => ok = false,
            }
        }
        vertex_failures += !ok as usize;
        let (a, rb) = grid_agreement(&ds, &g, 200);
        agree += a;
        robust += rb;
    }
    let rate = agree as f64 / robust as f64;
    Outcome {
        pass: vertex_failures == 0 && rate >= GRID_AGREEMENT,
        detail: format!(
            "{vertex_failures}/100 sets with vertex mismatch (worst matched error {worst:.1e}); grid agreement {rate:.6} on {robust} robust points"
        ),
        limit: Some(Duration::from_secs(30)),
    }
}

/// `p` is a hull vertex iff the directions to the other points leave an angular gap above π.
fn on_hull(ps: &[[f64; 2]], i: usize) -> bool {
    let p = ps[i];
    let mut ang: Vec<f64> = ps
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, q)| (q[1] - p[1]).atan2(q[0] - p[0]))
        .collect();
    ang.sort_by(f64::total_cmp);
    let mut gap = ang[0] + 2.0 * std::f64::consts::PI - ang[ang.len() - 1];
    for w in ang.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap > std::f64::consts::PI
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut interior_cells = 0;
    let (mut agree, mut robust) = (0, 0);
    for _ in 0..20 {
        let n = r.gen_range(4..=15);
        let ps = random_points(&mut r, n);
        let sites = ps
            .iter()
            .enumerate()
            .map(|(i, p)| Site::point_inside(i + 1, p).unwrap())
            .collect();
        let ds = DataSet::new(sites, 2).unwrap();
        let g = diagram(&ds);
        interior_cells += g.cells.iter().filter(|&&id| !on_hull(&ps, id - 1)).count();
        let (a, rb) = grid_agreement(&ds, &g, 200);
        agree += a;
        robust += rb;
    }
    Outcome {
        pass: interior_cells == 0 && agree == robust && robust > 0,
        detail: format!(
            "{interior_cells} nonempty cells of non-hull sites; grid labels {agree}/{robust} robust points match"
        ),
        limit: Some(Duration::from_secs(10)),
    }
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut edges = 0;
    for _ in 0..20 {
        let n = r.gen_range(3..=10);
        let mut circles: Vec<([f64; 2], f64)> = Vec::new();
        while circles.len() < n {
            let c = [r.gen::<f64>(), r.gen::<f64>()];
            let rad = r.gen_range(0.01..0.1);
            if circles
                .iter()
                .all(|(q, t)| ((c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2)).sqrt() > rad + t)
            {
                circles.push((c, rad));
            }
        }
        let sites = circles
            .iter()
            .enumerate()
            .map(|(i, (c, t))| Site::power_sphere(i + 1, c, *t).unwrap())
            .collect();
        let ds = DataSet::new(sites, 2).unwrap();
        let g = diagram(&ds);
        for e in &g.edges {
            let ids: Vec<usize> = e.defining_sites.iter().copied().collect();
            let pow = |x: &[f64], id: usize| {
                let (q, t) = circles[id - 1];
                (x[0] - q[0]).powi(2) + (x[1] - q[1]).powi(2) - t * t
            };
            edges += 1;
            for x in &e.sample_polyline {
                for w in ids.windows(2) {
                    worst = worst.max((pow(x, w[0]) - pow(x, w[1])).abs());
                }
            }
        }
    }
    Outcome {
        pass: worst <= RADICAL_TOL && edges > 0,
        detail: format!("{edges} edges, worst radical-axis residual {worst:.3e}"),
        limit: Some(Duration::from_secs(10)),
    }
}

fn criterion_6() -> Outcome {
    let sites = vec![
        Site::exterior_sphere(1, &[-1.0, 0.0], 0.3).unwrap(),
        Site::exterior_sphere(2, &[1.0, 0.0], 0.3).unwrap(),
        Site::exterior_sphere(3, &[0.0, 0.0], 0.05).unwrap(),
    ];
    let ds = DataSet::new(sites, 2).unwrap();
    let g = compute_diagram_in_box(&ds, BoundingBox::new(5.2).unwrap(), &DiagramOptions::default()).unwrap();
    let all = BTreeSet::from([1, 2, 3]);
    let region: Vec<_> = g.vertices.iter().filter(|v| v.tight_sites == all).collect();
    let expected = [[0.0, 1.875], [0.0, -1.875]];
    let located = expected.iter().all(|e| {
        region
            .iter()
            .any(|v| max_abs_diff(&v.center, e) <= VERTEX_TOL && (v.radius - 1.825).abs() <= VERTEX_TOL)
    });
    Outcome {
        pass: region.len() == 2 && located,
        detail: format!(
            "{} vertices tight on {{1,2,3}}: {:?}",
            region.len(),
            region.iter().map(|v| (&v.center, v.radius)).collect::<Vec<_>>()
        ),
        limit: Some(Duration::from_secs(1)),
    }
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut bad = 0;
    let mut vertices = 0;
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let m = r.gen_range(5..=8);
        // vertices on a random ellipse in angular order form a convex polygon
        let ang = loop {
            let mut ang: Vec<f64> = (0..m).map(|_| r.gen_range(0.0..std::f64::consts::TAU)).collect();
            ang.sort_by(f64::total_cmp);
            let min_gap = ang
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(ang[0] + std::f64::consts::TAU - ang[m - 1], f64::min);
            if min_gap > 0.1 {
                break ang;
            }
        };
        let (ax, ay, rot) = (r.gen_range(0.7..1.3), r.gen_range(0.7..1.3), r.gen_range(0.0..3.0f64));
        let poly: Vec<[f64; 2]> = ang
            .iter()
            .map(|a| {
                let (u, v) = (ax * a.cos(), ay * a.sin());
                [u * rot.cos() - v * rot.sin(), u * rot.sin() + v * rot.cos()]
            })
            .collect();
        // counter-clockwise polygon: the interior lies left of each edge
        let sites: Vec<Site> = (0..m)
            .map(|i| {
                let (p, q) = (poly[i], poly[(i + 1) % m]);
                let n = [p[1] - q[1], q[0] - p[0]];
                let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
                let n = [n[0] / len, n[1] / len];
                Site::halfspace(i + 1, &n, n[0] * p[0] + n[1] * p[1]).unwrap()
            })
            .collect();
        let ds = DataSet::new(sites.clone(), 2).unwrap();
        let g = diagram(&ds);
        for v in &g.vertices {
            vertices += 1;
            let mr = max_radius(&v.center, &ds).unwrap_or(f64::NAN);
            let mut ok = v.tight_sites.len() >= 3;
            for &id in &v.tight_sites {
                let gvd::SiteKind::HalfSpace(h) = &sites[id - 1].kind else {
                    unreachable!()
                };
                let err = (h.signed_distance(&v.center) - mr).abs();
                worst = worst.max(err);
                ok &= err <= VERTEX_TOL;
            }
            bad += !ok as usize;
        }
    }
    Outcome {
        pass: bad == 0 && vertices > 0,
        detail: format!("{bad}/{vertices} medial-axis vertices fail; worst distance gap {worst:.3e}"),
        limit: Some(Duration::from_secs(5)),
    }
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f = QuadraticFunction::new(
            r.gen_range(-3.0..3.0),
            (0..2).map(|_| r.gen_range(-5.0..5.0)).collect(),
            (0..2).map(|_| r.gen_range(-5.0..5.0)).collect(),
            r.gen_range(-5.0..5.0),
        )
        .unwrap();
        let x: Vec<f64> = (0..2).map(|_| r.gen_range(-10.0..10.0)).collect();
        let fx = f.eval(&x);
        let v = quadratic_to_functional(&f).eval(&phi(&x));
        worst = worst.max((fx - v).abs() / fx.abs().max(1.0));
    }
    let mut mismatched_sets = 0;
    for _ in 0..20 {
        let n = r.gen_range(3..=10);
        let ps = random_points(&mut r, n);
        let ds = outside_points(&ps);
        let g = diagram(&ds);
        let fs: Vec<_> = ps.iter().map(|p| QuadraticFunction::squared_distance(p)).collect();
        let md = minimization_diagram_with(&fs, &g.bbox, &MdOptions::default()).unwrap();
        let same = md.vertices.len() == g.vertices.len()
            && g.vertices.iter().all(|v| {
                md.vertices
                    .iter()
                    .any(|w| max_abs_diff(&v.center, &w.point) <= VERTEX_TOL && w.minimizers == v.tight_sites)
            });
        mismatched_sets += !same as usize;
    }
    Outcome {
        pass: worst <= FACTOR_TOL && mismatched_sets == 0,
        detail: format!(
            "worst relative factorization error {worst:.3e}; {mismatched_sets}/20 cross-engine vertex-set mismatches"
        ),
        limit: Some(Duration::from_secs(5)),
    }
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let (mut agree, mut robust) = (0, 0);
    let mut runs = 0;
    for m in 4..=6 {
        for k in [2, 3] {
            for _ in 0..2 {
                let ps = random_points(&mut r, m);
                let fs: Vec<_> = ps.iter().map(|p| QuadraticFunction::squared_distance(p)).collect();
                let bbox = BoundingBox::new(2.0).unwrap();
                let md = order_k_diagram(&fs, k, &bbox, &MdOptions::default()).unwrap();
                runs += 1;
                for x in (GridSpec {
                    n: 100,
                    half_width: 2.0,
                    dim: 2,
                })
                .points()
                {
                    if md_margin(&fs, &x, k) <= ROBUST_MARGIN {
                        continue;
                    }
                    robust += 1;
                    agree += (md.cell_at(&x) == k_smallest(&fs, &x, k)) as usize;
                }
            }
        }
    }
    Outcome {
        pass: agree == robust && robust > 0,
        detail: format!("{runs} order-k diagrams; {agree}/{robust} robust grid points match"),
        limit: Some(Duration::from_secs(20)),
    }
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut time = |n: usize| {
        let ds = outside_points(&random_points(&mut r, n));
        (0..3)
            .map(|_| {
                let t = Instant::now();
                let g = diagram(&ds);
                assert!(!g.vertices.is_empty());
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let t512 = time(512);
    let t1024 = time(1024);
    let ratio = t1024.as_secs_f64() / t512.as_secs_f64();
    Outcome {
        pass: ratio <= SCALING_FACTOR,
        detail: format!("n=512 {t512:.2?}, n=1024 {t1024:.2?}, ratio {ratio:.2}"),
        limit: None,
    }
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = out.limit.is_none_or(|l| elapsed <= l);
        let pass = out.pass && in_time;
        failed += !pass as usize;
        let budget = out.limit.map_or(String::new(), |l| format!(" / limit {l:?}"));
        println!(
            "criterion {n:>2}: {} | {} | {elapsed:.2?}{budget}",
            if pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
