//! Writes and reads back every file format: cube, labels, region maps via a
//! hierarchy directory, sequences and kernel matrices.

use hsk::datamodel::{
    read_cube, read_gram, read_labels, read_sequences, write_cube, write_gram, write_labels,
    write_sequences, FeatureSequence, GramMatrix, HyperCube, LabelRaster, SequenceRecord,
};
use hsk::hierarchy::{segment_standardized, Hierarchy};

fn main() -> hsk::Result<()> {
    let dir = std::env::temp_dir().join("hsk-file-formats");
    std::fs::create_dir_all(&dir).map_err(|e| hsk::Error::Io { path: dir.clone(), source: e })?;

    let values: Vec<f64> = (0..4 * 4 * 2).map(|i| (i % 7) as f64 * 0.5).collect();
    let cube = HyperCube::from_f64(4, 4, 2, &values)?;
    write_cube(&cube, dir.join("scene.hsc"))?;
    assert_eq!(read_cube(dir.join("scene.hsc"))?, cube);

    let labels = LabelRaster::new(4, 4, (0..16).map(|i| (i % 3) as u16).collect())?;
    write_labels(&labels, dir.join("scene.hsl"))?;
    println!("classes {:?}", read_labels(dir.join("scene.hsl"))?.class_counts());

    let h = segment_standardized(&cube, &[0.5, 2.0, 8.0])?;
    h.write_dir(dir.join("hierarchy"))?;
    let back = Hierarchy::read_dir(dir.join("hierarchy"))?;
    println!("hierarchy with {} levels, alphas {:?}", back.num_levels(), back.alphas());

    let records = vec![
        SequenceRecord {
            id: "a".into(),
            label: 1,
            sequence: FeatureSequence::new(vec![vec![1.0, 2.0], vec![1.5, 1.5]])?,
        },
        SequenceRecord {
            id: "b".into(),
            label: 2,
            sequence: FeatureSequence::new(vec![vec![0.0, 1.0]])?,
        },
    ];
    write_sequences(&records, dir.join("samples.hsq"))?;
    assert_eq!(read_sequences(dir.join("samples.hsq"))?, records);

    let k = GramMatrix::square(vec![1.0, 0.25, 0.25, 1.0], vec!["a".into(), "b".into()])?;
    write_gram(&k, dir.join("train.hsg"))?;
    let test = GramMatrix::new(vec![0.5, 0.1], vec!["t".into()], vec!["a".into(), "b".into()])?;
    write_gram(&test, dir.join("test.hsr"))?;
    println!(
        "self kernel {}x{}, cross kernel {}x{}",
        read_gram(dir.join("train.hsg"))?.rows(),
        k.cols(),
        read_gram(dir.join("test.hsr"))?.rows(),
        test.cols()
    );
    println!("files in {}", dir.display());
    Ok(())
}
