//! Exterior algebra, integer collections and shortest vectors against direct oracles.

mod common;

use badlatt::arith::{int, rat, Rational};
use badlatt::exterior::{
    index_sets, is_primitive, laplace_gram, minkowski_short, primitive_dual, saturation_index, shortest_vector_exact,
    IntCollection, MultiVector, SquareMap,
};
use common::*;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn wedge_of_two_vectors_in_three_dimensions() {
    let w = MultiVector::wedge_all(&[to_rationals(&[1, 2, 0]), to_rationals(&[0, 1, 1])]).unwrap();
    assert_eq!(w.sets(), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    assert_eq!(w.coords(), &[int(1), int(1), int(2)]);
    assert_eq!(w.norm2(), int(6));
}

#[test]
fn index_sets_are_lexicographic_binomials() {
    assert_eq!(index_sets(4, 2).len(), 6);
    assert_eq!(index_sets(5, 0), vec![Vec::<usize>::new()]);
    assert!(index_sets(2, 3).is_empty());
    assert_eq!(index_sets(4, 3), subsets(4, 3));
}

#[test]
fn primitive_examples() {
    let prim = IntCollection::from_i64(&[&[1, 0, 0], &[0, 1, 0]]);
    assert!(is_primitive(&prim).unwrap());
    let doubled = IntCollection::from_i64(&[&[2, 0, 0], &[0, 1, 0]]);
    assert!(!is_primitive(&doubled).unwrap());
    assert_eq!(saturation_index(&doubled).unwrap(), BigInt::from(2));
    let skew = IntCollection::from_i64(&[&[1, 1, 0], &[1, -1, 0]]);
    assert_eq!(saturation_index(&skew).unwrap(), BigInt::from(2));
}

#[test]
fn multivector_json_roundtrip() {
    let w = MultiVector::wedge_all(&[to_rationals(&[1, 2, 0, 3]), vec![rat(1, 2), int(0), int(-1), int(4)]]).unwrap();
    let back = MultiVector::<Rational>::from_json(&w.to_json()).unwrap();
    assert_eq!(back, w);
    assert!(MultiVector::<Rational>::from_json("{\"dim\":3,\"grade\":2,\"coords\":[\"1\"]}").is_err());
}

/// Shortest vector by enumerating every coefficient vector inside the box implied by the inverse basis.
fn brute_shortest(cols: &[Vec<i64>]) -> Rational {
    let d = cols.len();
    let b = SquareMap::from_columns(&cols.iter().map(|c| to_rationals(c)).collect::<Vec<_>>()).unwrap();
    let inv = b.inverse().unwrap();
    let cap = cols.iter().map(|c| norm2(&to_rationals(c))).min().unwrap();
    let cap_f = badlatt::arith::to_f64(&cap).sqrt();
    let bounds: Vec<i64> = (0..d)
        .map(|i| {
            let row = inv.row(i);
            (badlatt::arith::to_f64(&norm2(&row)).sqrt() * cap_f).floor() as i64 + 1
        })
        .collect();
    let mut best = cap;
    let mut c = bounds.iter().map(|b| -b).collect::<Vec<_>>();
    loop {
        if c.iter().any(|x| *x != 0) {
            let v: Vec<i64> = (0..d).map(|k| (0..d).map(|j| c[j] * cols[j][k]).sum()).collect();
            best = best.min(norm2(&to_rationals(&v)));
        }
        let mut i = 0;
        while i < d {
            c[i] += 1;
            if c[i] <= bounds[i] {
                break;
            }
            c[i] = -bounds[i];
            i += 1;
        }
        if i == d {
            return best;
        }
    }
}

#[test]
fn shortest_vectors_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 60 {
        let d = rng.gen_range(2..=3);
        let cols: Vec<Vec<i64>> = (0..d).map(|_| random_int_vec(&mut rng, d, 9)).collect();
        let rs: Vec<Vec<Rational>> = cols.iter().map(|c| to_rationals(c)).collect();
        if det_permutations(&rs).is_zero() {
            continue;
        }
        let sv = shortest_vector_exact(&SquareMap::from_columns(&rs).unwrap()).unwrap();
        assert_eq!(sv.norm2, brute_shortest(&cols), "{cols:?}");
        let recombined: Vec<Rational> =
            (0..d).map(|k| (0..d).map(|j| Rational::from_integer(sv.coeffs[j].clone()) * &rs[j][k]).sum()).collect();
        assert_eq!(recombined, sv.vector);
        done += 1;
    }
}

#[test]
fn singular_basis_is_rejected() {
    let b = SquareMap::from_columns(&[to_rationals(&[1, 2]), to_rationals(&[2, 4])]).unwrap();
    assert!(shortest_vector_exact(&b).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wedge_coordinates_are_maximal_minors(seed in any::<u64>(), dim in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=dim);
        let vs: Vec<Vec<Rational>> = (0..k).map(|_| (0..dim).map(|_| random_rational(&mut rng, 5, 4)).collect()).collect();
        let w = MultiVector::wedge_all(&vs).unwrap();
        prop_assert_eq!(w.coords().to_vec(), wedge_minors(&vs));
    }

    #[test]
    fn wedge_is_associative_and_graded_commutative(seed in any::<u64>(), dim in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = |rng: &mut ChaCha8Rng| MultiVector::from_vector((0..dim).map(|_| random_rational(rng, 4, 3)).collect());
        let (a, b, c) = (v(&mut rng), v(&mut rng), v(&mut rng));
        let left = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let right = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        prop_assert_eq!(ab.add(&ba).unwrap().is_exact_zero(), true);
    }

    #[test]
    fn laplace_identity(seed in any::<u64>(), dim in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=dim);
        let mk = |rng: &mut ChaCha8Rng| -> Vec<Vec<Rational>> {
            (0..k).map(|_| (0..dim).map(|_| random_rational(rng, 6, 5)).collect()).collect()
        };
        let (u, v) = (mk(&mut rng), mk(&mut rng));
        let gram: Vec<Vec<Rational>> = u.iter().map(|a| v.iter().map(|b| dot(a, b)).collect()).collect();
        let lhs = laplace_gram(&u, &v).unwrap();
        prop_assert_eq!(&lhs, &det_permutations(&gram));
        prop_assert_eq!(lhs, dot(&wedge_minors(&u), &wedge_minors(&v)));
    }

    #[test]
    fn primitivity_matches_minor_gcd(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..dim);
        let vs: Vec<Vec<i64>> = (0..k).map(|_| random_int_vec(&mut rng, dim, 4)).collect();
        let g = minor_gcd(&vs);
        prop_assume!(!g.is_zero());
        let rows: Vec<&[i64]> = vs.iter().map(Vec::as_slice).collect();
        let c = IntCollection::from_i64(&rows);
        prop_assert_eq!(is_primitive(&c).unwrap(), g.is_one());
        prop_assert_eq!(saturation_index(&c).unwrap(), g);
    }

    #[test]
    fn dual_is_orthogonal_primitive_and_norm_preserving(seed in any::<u64>(), dim in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols = unimodular_columns(&mut rng, dim);
        let k = rng.gen_range(1..dim);
        let rows: Vec<&[i64]> = cols[..k].iter().map(Vec::as_slice).collect();
        let c = IntCollection::from_i64(&rows);
        let dual = primitive_dual(&c).unwrap();
        prop_assert_eq!(dual.len(), dim - k);
        for a in c.rational_vectors() {
            for b in dual.rational_vectors() {
                prop_assert!(dot(&a, &b).is_zero());
            }
        }
        prop_assert!(is_primitive(&dual).unwrap());
        prop_assert_eq!(norm2(&wedge_minors(&dual.rational_vectors())), norm2(&wedge_minors(&c.rational_vectors())));
    }

    #[test]
    fn minkowski_bound_holds(seed in any::<u64>(), dim in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=dim);
        let vs: Vec<Vec<Rational>> = (0..k).map(|_| (0..dim).map(|_| random_rational(&mut rng, 8, 3)).collect()).collect();
        let gram: Vec<Vec<Rational>> = vs.iter().map(|a| vs.iter().map(|b| dot(a, b)).collect()).collect();
        let covol2 = det_permutations(&gram);
        prop_assume!(!covol2.is_zero());
        let sv = minkowski_short(&vs).unwrap();
        let lhs = num_traits::pow(&sv.norm2 / int(k as i64), k);
        prop_assert!(lhs <= covol2);
        prop_assert!(sv.norm2 <= vs.iter().map(|v| norm2(v)).min().unwrap());
    }

    #[test]
    fn determinant_matches_permutation_expansion(seed in any::<u64>(), dim in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Rational>> = (0..dim).map(|_| (0..dim).map(|_| random_rational(&mut rng, 5, 3)).collect()).collect();
        let m = SquareMap::from_rows(rows.clone()).unwrap();
        prop_assert_eq!(m.det_exact(), det_permutations(&rows));
    }
}
