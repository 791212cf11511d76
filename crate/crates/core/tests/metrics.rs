use proptest::prelude::*;

use psas::geometry::Footprint;
use psas::metrics::{contrast, relative_difference, snr, write_metric_csv, IdealProfile, MetricRow};
use psas::reconstruct::ImageGrid;
use psas::{GridSpec, Point};

const N: usize = 8;

fn spec() -> GridSpec {
    GridSpec::centered(Point::ORIGIN, 1e-3, N).unwrap()
}

fn image(pixels: Vec<f64>) -> ImageGrid {
    ImageGrid::new(spec(), pixels, vec![true; N * N]).unwrap()
}

fn ideal() -> IdealProfile {
    let disk = Footprint::Disk { center: Point::new(0.001, -0.0005), radius: 0.0022 };
    IdealProfile::from_footprints(spec(), vec![true; N * N], vec![disk]).unwrap()
}

fn positive_image() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, N * N).prop_filter("needs a positive pixel", |v| v.iter().any(|&x| x > 1e-6))
}

#[test]
fn ideal_scores_zero_and_blank_scores_one() {
    let ideal = ideal();
    assert_eq!(relative_difference(&ideal.image, &ideal).unwrap(), 0.0);
    let lit = ideal.image.unmasked().filter(|&v| v > 0.0).count();
    assert!(lit > 5);
    // a blank image is as far from the profile as the profile is large
    let blank = image(vec![0.0; N * N]);
    assert_eq!(relative_difference(&blank, &ideal).unwrap(), 1.0);
}

#[test]
fn csv_has_header_and_rows() {
    let img = image((0..N * N).map(|i| i as f64).collect());
    let row = MetricRow::evaluate("metal", "psas", "matched", &img, &ideal()).unwrap();
    let mut out = Vec::new();
    write_metric_csv(&[row.clone(), row], &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scene,algorithm,dielectric_variant,snr_db,ctr_db,delta");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("metal,psas,matched,"));
}

proptest! {
    #[test]
    fn contrast_never_exceeds_snr(px in positive_image()) {
        let img = image(px);
        let (s, c) = (snr(&img).unwrap(), contrast(&img).unwrap());
        prop_assert!(c >= -1e-12);
        prop_assert!(c <= s + 1e-9);
    }

    #[test]
    fn metrics_ignore_overall_scale(px in positive_image(), scale in 1e-6f64..1e6) {
        let (a, b) = (image(px.clone()), image(px.iter().map(|v| v * scale).collect()));
        prop_assert!((snr(&a).unwrap() - snr(&b).unwrap()).abs() < 1e-9);
        prop_assert!((contrast(&a).unwrap() - contrast(&b).unwrap()).abs() < 1e-9);
        let ideal = ideal();
        let (da, db) = (relative_difference(&a, &ideal).unwrap(), relative_difference(&b, &ideal).unwrap());
        prop_assert!((da - db).abs() <= 1e-9 * da.max(1.0));
    }

    #[test]
    fn difference_is_bounded_for_nonnegative_images(px in positive_image()) {
        // both images peak at one, so each pixel contributes at most one
        let ideal = ideal();
        let lit = ideal.image.unmasked().filter(|&v| v > 0.0).count() as f64;
        let d = relative_difference(&image(px), &ideal).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(d <= (N * N) as f64 / lit + 1e-12);
    }
}
