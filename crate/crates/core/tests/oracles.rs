mod common;

use common::*;
use framelink::curve::random_pair;
use framelink::geometry::Vec3;
use framelink::knot::{link_r3, Knot};
use framelink::linking::{link, link_embedded, LinkOptions, Method};
use framelink::rational::q;
use framelink::rng::seeded_rng;
use framelink::FrameInt;

#[test]
fn solid_angle_sum_matches_the_double_integral() {
    let square: Vec<P3> = vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [1.0, 1.0, 0.0], [-1.0, 1.0, 0.0]];
    let hoop: Vec<P3> = vec![[0.0, 0.0, -1.0], [2.0, 0.0, -1.0], [2.0, 0.0, 1.0], [0.0, 0.0, 1.0]];
    let exact = gauss_polygons(&square, &hoop);
    let numeric = gauss_midpoint(&square, &hoop, 200);
    assert!((exact - numeric).abs() < 1e-2, "{exact} vs {numeric}");
    assert!((exact.abs() - 1.0).abs() < 1e-9);
}

#[test]
fn knot_crossing_count_matches_gauss() {
    let v = |x: i64, y: i64, z: i64| Vec3::new(q(x), q(y), q(z));
    let square = Knot::new(vec![v(-1, -1, 0), v(1, -1, 0), v(1, 1, 0), v(-1, 1, 0)]).unwrap();
    let hoop = Knot::new(vec![v(0, 0, -1), v(2, 0, -1), v(2, 0, 1), v(0, 0, 1)]).unwrap();
    let f = |k: &Knot| -> Vec<P3> { k.vertices()[..k.vertices().len() - 1].iter().map(|p| p.to_f64()).collect() };
    let g = gauss_polygons(&f(&square), &f(&hoop)).round() as i64;
    assert_eq!(link_r3(&square, &hoop, 1).unwrap(), g);
}

#[test]
fn embedding_method_matches_gauss_on_random_pairs() {
    let mut rng = seeded_rng(2024);
    let mut nonzero = 0;
    for i in 0..60 {
        let w1 = (i % 7) as i64 - 3;
        let w2 = ((i / 7) % 7) as i64 - 3;
        let (a, b) = random_pair(&mut rng, w1, w2, 5, 2);
        let oracle = gauss_link(&a, &b).expect("sampled curves are fine enough");
        assert_eq!(link_embedded(&a, &b, i).unwrap(), oracle);
        nonzero += (oracle != 0) as usize;
    }
    assert!(nonzero > 10);
}

#[test]
fn fibers_are_unlinked_in_the_embedding() {
    assert_eq!(gauss_link(&fiber(1, 0), &fiber(-1, 1)), Some(0));
}

#[test]
fn finger_moves_jump_by_the_crossing_sign() {
    let mut rng = seeded_rng(77);
    let mut done = 0;
    while done < 20 {
        let Some(f) = random_finger(&mut rng) else { continue };
        let before = gauss_link_fine(&f.before, &f.c2, f.gap.sqrt()).unwrap();
        let after = gauss_link_fine(&f.after, &f.c2, f.gap.sqrt()).unwrap();
        assert_eq!(after - before, f.expected);
        let opts = LinkOptions::with_seed(done);
        for p in [-1, 0, 2] {
            let x = link(&f.before, &f.c2, FrameInt(p), Method::Both, &opts).unwrap().value;
            let y = link(&f.after, &f.c2, FrameInt(p), Method::Both, &opts).unwrap().value;
            assert_eq!(y - x, f.expected);
        }
        done += 1;
    }
}
