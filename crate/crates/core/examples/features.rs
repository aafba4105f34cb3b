//! Prints the five descriptors of a patch and the distances between a face,
//! a flower bed and a leaf image.

use arcimboldo::fixtures;
use arcimboldo::imagefeat::{DescriptorKind, DetailMetric, FeatureBundle, DETAIL_LEN};

fn main() -> arcimboldo::Result<()> {
    let samples = [
        ("face", fixtures::faces(1, 1).remove(0)),
        ("flowers", fixtures::flowers(1, 1).remove(0)),
        ("leaves", fixtures::leaves(1, 1).remove(0)),
    ];
    let bundles: Vec<FeatureBundle> =
        samples.iter().map(|(_, img)| FeatureBundle::extract(img, img.width(), img.height())).collect::<Result<_, _>>()?;

    let (name, f) = (samples[0].0, &bundles[0]);
    println!("{name}: detail vector of {DETAIL_LEN} values");
    for kind in DescriptorKind::ALL {
        let v = f.descriptor(kind);
        let shown: Vec<String> = v.iter().take(10).map(|x| format!("{x:.3}")).collect();
        println!("  {:<5} ({:>2}) {}", kind.name(), v.len(), shown.join(" "));
    }
    println!("  general {:?}", f.general);

    let metric = DetailMetric::default();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            println!("{} - {}: {:.4}", samples[i].0, samples[j].0, metric.distance(&bundles[i], &bundles[j]));
        }
    }
    Ok(())
}
