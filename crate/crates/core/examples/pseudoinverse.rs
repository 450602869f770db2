use hyperinv::checks::outer_inverse_check;
use hyperinv::driver::{iterate, StopRule};
use hyperinv::init::{init_pan_schreiber, PanSchreiberConvention};
use hyperinv::matrix::{hilbert, NormKind};
use hyperinv::scalar::{Ext, Precision};
use hyperinv::scheme::SchemeId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prec = Precision::extended(40);
    let a = hilbert::<Ext>(8, 6, prec);
    let init = init_pan_schreiber(&a, None, PanSchreiberConvention::Classical)?;
    let eps = Ext::from_f64(1e-20, prec);
    let stop = StopRule::reliable(18, init.alpha_abs(), eps, NormKind::Frobenius);
    let report = iterate(SchemeId::Pm, &a, &init.x0, &stop)?;
    println!(
        "{} loops, {} products",
        report.loops,
        report.total_matmuls()
    );
    let r = outer_inverse_check(&a, &report.x, NormKind::Frobenius)?.to_f64();
    println!("Penrose residuals: {r:?}");
    Ok(())
}
