mod common;

use flatclust::bayes::{bayes_update, uniform_measure, ParamMeasure};
use flatclust::bip::{check_feasible, solve_bruteforce, solve_exact, BinaryIntegerProgram, BoolMatrix, Matrix};
use flatclust::clustering::{
    make_single_linkage_functor, robust_single_linkage, single_linkage, ClusteringFunctor,
};
use flatclust::flatten::{flatten_detailed, Mode};
use flatclust::metric::{check_nonexpansive, mutual_reachability, MetricMap, MetricSpace};
use flatclust::partition::{adjusted_rand_score, is_partition_morphism, rand_likelihood, refines, Partition};
use flatclust::Error;
use proptest::prelude::*;

use common::*;

fn cloud(max_n: usize, dims: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dims), 1..=max_n)
}

fn labels(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(0i64..4, n))
}

fn param() -> impl Strategy<Value = f64> {
    (0.0f64..1.0).prop_map(|u| 1.0 - u)
}

fn small_program() -> impl Strategy<Value = BinaryIntegerProgram> {
    (1usize..=8, 1usize..=6)
        .prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(-2i32..=6, m),
                prop::collection::vec(0u8..=3, n * m),
                prop::collection::vec(prop::bool::weighted(0.3), n * m),
                prop::collection::vec(0u8..=6, n),
            )
                .prop_map(move |(c, a, b, u)| {
                    let mut am = Matrix::zeros(n, m);
                    let mut bm = BoolMatrix::zeros(n, m);
                    for i in 0..n {
                        for j in 0..m {
                            am.set(i, j, a[i * m + j] as f64 * 0.5);
                            bm.set(i, j, b[i * m + j]);
                        }
                    }
                    BinaryIntegerProgram::new(
                        c.iter().map(|&x| x as f64 * 0.25).collect(),
                        am,
                        bm,
                        u.iter().map(|&x| x as f64 * 0.5).collect(),
                    )
                    .unwrap()
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_linkage_refines_as_scale_grows(pts in cloud(12, 2), a in param(), b in param()) {
        let x = MetricSpace::from_point_cloud(&pts).unwrap();
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        prop_assert!(refines(&single_linkage(&x, hi).unwrap(), &single_linkage(&x, lo).unwrap()).unwrap());
    }

    #[test]
    fn single_linkage_maps_are_partition_morphisms(
        target in cloud(6, 2),
        picks in prop::collection::vec(0usize..1000, 1..10),
        extra in prop::collection::vec(0.0f64..3.0, 10),
        a in param(),
    ) {
        let m = target.len();
        let f: Vec<usize> = picks.iter().map(|p| p % m).collect();
        let source: Vec<Vec<f64>> = f.iter().enumerate().map(|(i, &y)| {
            let mut p = target[y].clone();
            p.push(extra[i]);
            p
        }).collect();
        let lifted: Vec<Vec<f64>> = target.iter().map(|p| { let mut q = p.clone(); q.push(0.0); q }).collect();
        let xs = MetricSpace::from_point_cloud(&source).unwrap();
        let ys = MetricSpace::from_point_cloud(&lifted).unwrap();
        prop_assert!(check_nonexpansive(&MetricMap::new(&xs, &ys, f.clone()).unwrap()));
        let px = single_linkage(&xs, a).unwrap();
        let py = single_linkage(&ys, a).unwrap();
        prop_assert!(is_partition_morphism(&f, &px, &py).unwrap());
    }

    #[test]
    fn robust_single_linkage_is_permutation_equivariant(pts in cloud(10, 2), seed in any::<u64>(), a1 in param(), a2 in param()) {
        let x = MetricSpace::from_point_cloud(&pts).unwrap();
        let order = random_permutation(&mut rng(seed), x.len());
        let y = x.permuted(&order).unwrap();
        let f = inverse(&order);
        let px = robust_single_linkage(&x, a1, a2).unwrap();
        let py = robust_single_linkage(&y, a1, a2).unwrap();
        prop_assert!(is_partition_morphism(&f, &px, &py).unwrap());
        prop_assert!(is_partition_morphism(&order, &py, &px).unwrap());
        prop_assert_eq!(px.blocks().len(), py.blocks().len());
    }

    #[test]
    fn mutual_reachability_dominates_distance(pts in cloud(10, 2), a1 in param()) {
        let x = MetricSpace::from_point_cloud(&pts).unwrap();
        let mr = mutual_reachability(&x, a1).unwrap();
        for i in 0..x.len() {
            prop_assert_eq!(mr.dist(i, i), 0.0);
            for j in 0..x.len() {
                prop_assert!(mr.dist(i, j) >= x.dist(i, j));
                prop_assert_eq!(mr.dist(i, j), mr.dist(j, i));
            }
        }
    }

    #[test]
    fn nonexpansive_maps_compose(xs in cloud(6, 1), ys in cloud(6, 1), zs in cloud(6, 1), f in prop::collection::vec(0usize..100, 6), g in prop::collection::vec(0usize..100, 6)) {
        let (x, y, z) = (
            MetricSpace::from_point_cloud(&xs).unwrap(),
            MetricSpace::from_point_cloud(&ys).unwrap(),
            MetricSpace::from_point_cloud(&zs).unwrap(),
        );
        let fm = MetricMap::new(&x, &y, f[..x.len()].iter().map(|v| v % y.len()).collect()).unwrap();
        let gm = MetricMap::new(&y, &z, g[..y.len()].iter().map(|v| v % z.len()).collect()).unwrap();
        if check_nonexpansive(&fm) && check_nonexpansive(&gm) {
            prop_assert!(check_nonexpansive(&fm.then(&gm).unwrap()));
        }
    }

    #[test]
    fn refinement_is_a_partial_order(p in labels(7), q in labels(7), r in labels(7)) {
        let n = p.len().min(q.len()).min(r.len());
        let (p, q, r) = (
            Partition::from_labels(&p[..n]),
            Partition::from_labels(&q[..n]),
            Partition::from_labels(&r[..n]),
        );
        prop_assert!(refines(&p, &p).unwrap());
        if refines(&p, &q).unwrap() && refines(&q, &p).unwrap() {
            prop_assert!(p.same_blocks(&q));
        }
        if refines(&p, &q).unwrap() && refines(&q, &r).unwrap() {
            prop_assert!(refines(&p, &r).unwrap());
        }
        prop_assert!(refines(&Partition::singletons(n), &p).unwrap());
        prop_assert!(refines(&p, &Partition::whole(n)).unwrap());
    }

    #[test]
    fn adjusted_rand_score_is_symmetric(p in labels(9), q in labels(9)) {
        let n = p.len().min(q.len());
        let (p, q) = (Partition::from_labels(&p[..n]), Partition::from_labels(&q[..n]));
        let pq = adjusted_rand_score(&p, &q).unwrap();
        prop_assert!((pq - adjusted_rand_score(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!(pq <= 1.0 + 1e-12);
        prop_assert!((adjusted_rand_score(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rand_likelihood_is_a_probability(p in labels(9), q in labels(9)) {
        let n = p.len().min(q.len());
        prop_assume!(n >= 2);
        let (p, q) = (Partition::from_labels(&p[..n]), Partition::from_labels(&q[..n]));
        let g = rand_likelihood(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        // The produced partition itself is the most likely observation.
        prop_assert!(rand_likelihood(&q, &q).unwrap() >= g - 1e-15);
    }

    #[test]
    fn exact_solver_is_feasible_and_optimal(prog in small_program()) {
        let exact = solve_exact(&prog).unwrap();
        let brute = solve_bruteforce(&prog).unwrap();
        prop_assert!(check_feasible(&prog, &exact.v).unwrap());
        prop_assert_eq!(&exact.v, &brute.v);
        prop_assert!((exact.objective - prog.objective(&exact.v)).abs() < 1e-12);
    }

    #[test]
    fn bayes_update_stays_normalized(pts in cloud(7, 2), obs in labels(7), seed in any::<u64>()) {
        let sl = make_single_linkage_functor();
        let x = MetricSpace::from_point_cloud(&pts).unwrap();
        let n = x.len();
        prop_assume!(n >= 2 && obs.len() >= n);
        let prior = uniform_measure(sl.space(), 30, seed).unwrap();
        // With no agreeing pair under any particle the update collapses.
        let post = match bayes_update(&prior, &sl, &x, &Partition::from_labels(&obs[..n])) {
            Err(Error::PosteriorCollapse { .. }) => return Ok(()),
            other => other.unwrap(),
        };
        let total: f64 = post.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(post.weights().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn flatten_selects_disjoint_observed_clusters(pts in cloud(10, 2), seed in any::<u64>()) {
        let sl = make_single_linkage_functor();
        let x = MetricSpace::from_point_cloud(&pts).unwrap();
        let measure = uniform_measure(sl.space(), 25, seed).unwrap();
        let out = flatten_detailed(&sl, &measure, &x, 0, 0, Mode::Particle).unwrap();
        let mut seen = vec![false; x.len()];
        for block in out.partition.blocks() {
            for &p in block {
                prop_assert!(!seen[p]);
                seen[p] = true;
            }
            let is_noise = block.len() == 1 && out.partition.is_noise(block[0]);
            prop_assert!(is_noise || out.collection.sets().contains(block));
        }
        prop_assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn json_round_trips(p in labels(8), seed in any::<u64>(), prog in small_program()) {
        let part = Partition::from_labels(&p);
        let text = serde_json::to_string(&part).unwrap();
        prop_assert_eq!(&serde_json::from_str::<Partition>(&text).unwrap(), &part);

        let sl = make_single_linkage_functor();
        let m = uniform_measure(sl.space(), 5, seed).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(&serde_json::from_str::<ParamMeasure>(&text).unwrap(), &m);

        let text = serde_json::to_string(&prog).unwrap();
        prop_assert_eq!(&serde_json::from_str::<BinaryIntegerProgram>(&text).unwrap(), &prog);
    }
}
