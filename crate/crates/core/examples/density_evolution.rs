//! Gaussian-approximation density evolution: the (3,6) threshold, the Psi
//! approximations, and block-fading predictions for the three ensembles.

use gancc::codes::Ensemble;
use gancc::channel::FadingModel;
use gancc::de::{psi_approx, psi_exact, threshold_sigma, DeModel, DegreeProfile, PsiApprox, PsiKind};

fn main() -> gancc::Result<()> {
    let t = threshold_sigma(&DegreeProfile::regular(3, 6), 5000, PsiKind::Exact)?;
    println!("(3,6) threshold sigma = {t:.5} (Eb/N0 = {:.3} dB)", 10.0 * (1.0 / (t * t)).log10());

    for mu in [0.5, 2.0, 8.0, 30.0] {
        let exact = psi_exact(mu)?;
        let b = psi_approx(mu, PsiApprox::B)?;
        let a = psi_approx(mu, PsiApprox::A).map(|v| format!("{v:.4}")).unwrap_or_else(|_| "-".into());
        println!("Psi({mu:>4}) exact {exact:.4}  A {a:>6}  B {b:.4}");
    }

    println!("block fading, m = 5, D = 3");
    for ensemble in [Ensemble::Ldgm, Ensemble::EcLdgm, Ensemble::LtLdpc] {
        let model = DeModel {
            ensemble,
            degree: 3,
            iters: 60,
            kind: PsiKind::Exact,
        };
        let row: Vec<String> = [4.0, 8.0, 12.0]
            .iter()
            .map(|&snr| model.predict(snr, FadingModel::Block, 5, 400, 1).map(|p| format!("{snr} dB {p:.2e}")))
            .collect::<gancc::Result<_>>()?;
        println!("  {ensemble:>8}: {}", row.join(", "));
    }
    Ok(())
}
