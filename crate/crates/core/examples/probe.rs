use sdelta::distributions::*;

fn main() {
    let m1 = DegreesOfFreedom::new(1).unwrap();
    // Exact t_1 cdf: 0.5 + atan(x)/pi
    for t in [6.313751514800932_f64, 12.706204736432095] {
        let exact = 0.5 + t.atan() / std::f64::consts::PI;
        let ours = t_cdf(t, m1);
        println!("t={t}: cdf ours {ours:.17}, exact {exact:.17}, diff {:.3e}", ours - exact);
    }
    // inc_beta at the relevant point
    let t: f64 = 6.313751514800932;
    let x = 1.0 / (1.0 + t * t);
    let ib = inc_beta(x, 0.5, 0.5);
    // exact: I_x(1/2,1/2) = 2/pi * asin(sqrt(x))
    let exact = 2.0 / std::f64::consts::PI * x.sqrt().asin();
    println!("inc_beta({x}) = {ib:.17}, exact {exact:.17}, diff {:.3e}", ib - exact);
    let a = TwoSidedTailLevel::new(0.1).unwrap();
    println!("t_quantile(1, 0.1) = {:.15}", t_quantile(m1, a));
}
