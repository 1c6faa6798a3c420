use optstretch::*;
fn main() {
    let e = Exponents::new(vec![4, 4, 4]).unwrap();
    let grid = log_space(20.0, 300.0, 25).unwrap();
    let c1 = SearchConfig { levels: 8, grid_per_axis: 17, initial_radius: 0.5, keep_top: 10, expand_limit: 3 };
    let mut worst = (0.0f64, 0.0f64);
    let t_all: Vec<f64> = grid.iter().copied().filter(|&t| t >= 100.0).collect();
    for &t in &t_all {
        let t0 = std::time::Instant::now();
        let r = optimize(&e, t, Objective::MaximizePositive, &c1).unwrap();
        let dev = r.deviations.iter().map(|d| d.abs()).fold(0.0, f64::max);
        if dev > worst.1 { worst = (t, dev); }
        println!("t={t:8.3} C1: value={} dev={dev:.4} ({:.1?})", r.value, t0.elapsed());
    }
    println!("worst: t={:.3} dev={:.4}", worst.0, worst.1);
}
