use bmhull::paths::sample_brownian;
use bmhull::rain::{check_r, coupled_grid, generate_rain, level};
use bmhull::{build_hull, PathSample32, Polytope32, Rain32, Rain64, RainLevel32, SimRng, TimeGrid32, TimeGrid64};

#[test]
fn end_to_end_in_single_precision() {
    let mut rng = SimRng::new(42);
    let rain: Rain32 = generate_rain(20.0f32, &mut rng).unwrap();
    let lv: RainLevel32 = level(&rain, 20.0).unwrap();
    let grid: TimeGrid32 = coupled_grid(&lv, 129).unwrap();
    let path: PathSample32 = sample_brownian(2, &grid, &mut rng).unwrap();
    let hull: Polytope32 = build_hull(&path.values_at(lv.times()).unwrap()).unwrap();
    assert!(hull.facets.len() >= 3);
    check_r(&lv, &path, 20.0, (0.0, 1.0), 2).unwrap();
}

#[test]
fn precisions_share_one_random_stream() {
    let r64: Rain64 = generate_rain(30.0, &mut SimRng::new(9)).unwrap();
    let r32: Rain32 = generate_rain(30.0f32, &mut SimRng::new(9)).unwrap();
    assert_eq!(r64.len(), r32.len());
    let g64 = TimeGrid64::uniform(33).unwrap();
    let g32 = TimeGrid32::uniform(33).unwrap();
    let p64 = sample_brownian(2, &g64, &mut SimRng::new(9)).unwrap();
    let p32 = sample_brownian(2, &g32, &mut SimRng::new(9)).unwrap();
    for (a, b) in p64.points().zip(p32.points()) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - f64::from(*y)).abs() < 1e-5 * (1.0 + x.abs()));
        }
    }
}
