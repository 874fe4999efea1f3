use std::sync::OnceLock;

use proptest::prelude::*;

use qhlab::hyperbolicity::gromov_nodes;
use qhlab::theorems::predicted_a;
use qhlab::{gallery, graph_for, MetricKind, Point2, QhGraph};

const QH: MetricKind = MetricKind::Quasihyperbolic;

fn graphs() -> &'static [QhGraph] {
    static G: OnceLock<Vec<QhGraph>> = OnceLock::new();
    G.get_or_init(|| {
        ["disk", "slit-disk", "rooms-and-corridors"]
            .iter()
            .map(|n| graph_for(&gallery(n).unwrap(), 1.0 / 16.0).unwrap())
            .collect()
    })
}

fn pick(g: &QhGraph, f: f64) -> usize {
    ((f * g.len() as f64) as usize).min(g.len() - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_is_symmetric_and_triangular(gi in 0..3usize, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let g = &graphs()[gi];
        let (x, y, z) = (pick(g, a), pick(g, b), pick(g, c));
        for m in [QH, MetricKind::Length] {
            let (dxy, dyx) = (g.distance(m, x, y), g.distance(m, y, x));
            prop_assert!((dxy - dyx).abs() <= 1e-12 * dxy.max(1.0));
            prop_assert!(dxy <= g.distance(m, x, z) + g.distance(m, z, y) + 1e-12);
        }
    }

    #[test]
    fn subarc_lengths_add_up(gi in 0..3usize, a in 0.0..1.0f64, b in 0.0..1.0f64, t in 0.0..1.0f64) {
        let g = &graphs()[gi];
        let arc = g.geodesic_nodes(QH, pick(g, a), pick(g, b)).unwrap().arc;
        let s = t * arc.length();
        let (head, tail) = (arc.subarc(0.0, s).unwrap(), arc.subarc(s, arc.length()).unwrap());
        prop_assert!((head.length() + tail.length() - arc.length()).abs() <= 1e-12 * arc.length().max(1.0));
        prop_assert!(head.qh_length() + tail.qh_length() <= arc.qh_length() * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn boundary_distance_is_one_lipschitz(di in 0..4usize, x0 in -1.0..1.0f64, y0 in -1.0..1.0f64, x1 in -1.0..1.0f64, y1 in -1.0..1.0f64) {
        let dom = gallery(["disk", "square", "slit-disk", "snowflake-polygon"][di]).unwrap();
        let (p, q) = (Point2::new(x0, y0), Point2::new(x1, y1));
        prop_assume!(dom.contains(p) && dom.contains(q));
        let (dp, dq) = (dom.boundary_distance(p).unwrap(), dom.boundary_distance(q).unwrap());
        prop_assert!((dp - dq).abs() <= p.dist(q) + 1e-12);
    }

    #[test]
    fn gromov_product_identities(gi in 0..3usize, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let g = &graphs()[gi];
        let (w, x, y) = (pick(g, a), pick(g, b), pick(g, c));
        let pxy = gromov_nodes(g, w, x, y);
        prop_assert!((pxy - gromov_nodes(g, w, y, x)).abs() <= 1e-12 * pxy.abs().max(1.0));
        prop_assert!(pxy >= -1e-12);
        prop_assert!(pxy <= g.distance(QH, w, x).min(g.distance(QH, w, y)) + 1e-12);
        prop_assert!((gromov_nodes(g, w, x, x) - g.distance(QH, w, x)).abs() <= 1e-12 * pxy.max(1.0));
    }

    #[test]
    fn predicted_a_is_increasing(a in 1.0..20.0f64, d in 0.0..3.0f64, r in 0.0..3.0f64, step in 1e-3..1.0f64) {
        let base = predicted_a(a, d, r).unwrap();
        prop_assert!(predicted_a(a + step, d, r).unwrap() > base);
        prop_assert!(predicted_a(a, d + step, r).unwrap() > base);
        prop_assert!(predicted_a(a, d, r + step).unwrap() > base);
    }
}
