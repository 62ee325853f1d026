//! Spot checks of the statistics helpers against reference values
//! computed independently with NumPy/SciPy conventions (linear-interpolation
//! quantiles, population skewness g1, excess kurtosis g2).

use affectkit::features::stats::{kurtosis, pearson, skewness};
use affectkit::preprocess::quantile_sorted;

#[test]
fn numerics_match_reference_values() {
    let x = [-54.53279550656607, -36.64833205804943, 59.47309146654683, 35.25093415019492, -21.778089879618207, -33.43721442672309, 19.661750717437968, -62.65316287925733, 34.551208802924265, 88.36057305398742, -50.350857074085795, 89.77623036666364, 33.44749062007449, -80.82041288117759, -11.632066766437447, 77.29598386550353, 39.490699976404414, -34.705427185977584, 46.7856326660133, -55.973008890902754, -83.68108609155837, -68.0208797849905, -31.97996300905895, -6.961369259589816, -46.71579434184581, 63.15528068496138, -61.3411221421011, -74.10618476455994, -81.66704969101282, 19.713602732982636, 70.94838087480028, 20.32424833874262, 86.3976722271967, 44.956272218404024, 72.11026347865848, 85.86756031506326, 9.237201816470602];
    let y = [43.76729587677569, -0.5012059921175691, -22.62268175100125, -4.822129252523929, 16.503892339953026, -16.910906953294536, 40.3454006808239, -24.29258247234657, -16.017166238968017, -24.11466013570727, -14.455352005571399, -49.49776662828682, 12.860454409967872, -21.76172925748817, -43.19123105120543, 11.68289772563805, -32.36736797187966, -19.56116127804104, -5.911318912388197, -34.97976589372992, -28.2071136914565, -2.5666884666455516, -2.3631144918808147, -24.476764618049973, -20.243473185195192, -22.093288018623337, -23.942078750870245, -1.7238407200684236, -28.80209636484894, -0.4369403326959329, -25.373867416926245, 33.84826524669448, -31.986940990496493, 36.21562915092365, -32.17005551548125, 25.053133193724406, 11.112040383056524];
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let qs = [0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0];
    let expected_q = [-83.68108609155837, -82.95603298736198, -50.350857074085795, 9.237201816470602, 46.7856326660133, 89.2665937341002, 89.77623036666364];
    for (q, want) in qs.iter().zip(&expected_q) {
        let got = quantile_sorted(&sorted, *q);
        assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "q={q}: {got} vs {want}");
    }
    assert!((skewness(&x) - 0.027978186492431265).abs() <= 1e-9, "skew {}", skewness(&x));
    assert!((kurtosis(&x) - -1.3937564700447778).abs() <= 1e-9, "kurt {}", kurtosis(&x));
    assert!((pearson(&x, &y) - 0.036458264969505716).abs() <= 1e-9, "pearson {}", pearson(&x, &y));
}
