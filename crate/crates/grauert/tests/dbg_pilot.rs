use grauert::geometry::*;
use grauert::spectra::*;
use grauert::validator::*;
use nalgebra::DVector;

#[test]
fn dbg_worst_pair() {
    let model = TorusModel::new(2, 0.5, GroupAction::Trivial).unwrap();
    let cutoff = Cutoff::new(CutoffFamily::AutocorrelatedBump, 0.4, 0.0, 1e-10).unwrap();
    let t1 = 0.3;
    let x2 = model.point(vec![0.4, 0.7], vec![0.0, 0.5]).unwrap();
    let x12 = model.geodesic_flow(&x2, t1);
    let f12 = model.frame(&x12, false).unwrap();
    let f2 = model.frame(&x2, false).unwrap();
    // per-vector draw style worst case: both near norm 1.7-1.8, misaligned
    let mut disp = Displacement::zero(1);
    disp.v1 = DVector::from_vec(vec![1.25, 1.25]);
    disp.v2 = DVector::from_vec(vec![-1.2, 1.2]);
    for lam in [400.0, 800.0, 1600.0] {
        let pred = predict_near_graph(&model, &Isotype::All, &cutoff, &x2, t1, lam, &disp, KernelSide::Poisson).unwrap();
        let s = lam.sqrt();
        let x1l = model.displace(&f12, 0.0, &(&disp.v1 / s)).unwrap();
        let x2l = model.displace(&f2, 0.0, &(&disp.v2 / s)).unwrap();
        let kv = poisson_kernel(&model, &cutoff, &Isotype::All, lam, &x1l, &x2l, 1<<25).unwrap();
        println!("lam {:6.0}: ratio {:.5}  gauss_re {:.3} pred {:.3e}", lam, kv.value.norm()/pred.modulus, pred.gaussian_re, pred.modulus);
    }
}
