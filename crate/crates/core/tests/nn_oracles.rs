use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relcnn::embeddings::{etype_vocab, FeatureVocabs, RelposVocab, Vocab};
use relcnn::labels::RelationLabel;
use relcnn::model::{CnnModel, ExampleObjective, FeatureMask, Hyperparams};
use relcnn::nn::checkpoint::Checkpoint;
use relcnn::nn::{conv1d_relu, grad_check, max_pool, Array};
use relcnn::strategies::{ClassFilter, LabelSet, OrderingStrategy};
use relcnn::textproc::{Example, Provenance, TokenFeatures};

/// `out[t][f] = max(0, b[f] + Σ_i Σ_j x[t+i][j] · w[f][i][j])`, spelled out.
fn conv_oracle(x: &[Vec<f64>], w: &[Vec<Vec<f64>>], b: &[f64]) -> Vec<Vec<f64>> {
    let h = w[0].len();
    let mut out = Vec::new();
    for t in 0..=x.len() - h {
        let mut row = Vec::new();
        for f in 0..w.len() {
            let mut z = b[f];
            for i in 0..h {
                for j in 0..x[0].len() {
                    z += x[t + i][j] * w[f][i][j];
                }
            }
            row.push(if z > 0.0 { z } else { 0.0 });
        }
        out.push(row);
    }
    out
}

fn random_conv_case(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>, Vec<f64>) {
    let h = rng.gen_range(1..=5);
    let n = rng.gen_range(h..=h + 10);
    let d = rng.gen_range(1..=12);
    let f = rng.gen_range(1..=8);
    let mut v = || rng.gen_range(-1.0..1.0);
    let x = (0..n).map(|_| (0..d).map(|_| v()).collect()).collect();
    let w = (0..f).map(|_| (0..h).map(|_| (0..d).map(|_| v()).collect()).collect()).collect();
    let b = (0..f).map(|_| v()).collect();
    (x, w, b)
}

fn flatten(x: &[Vec<f64>]) -> Vec<f64> {
    x.iter().flatten().copied().collect()
}

#[test]
fn conv_matches_triple_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (x, w, b) = random_conv_case(&mut rng);
        let (n, d, f, h) = (x.len(), x[0].len(), w.len(), w[0].len());
        let input = Array::from_vec(&[n, d], flatten(&x)).unwrap();
        let filters = Array::from_vec(&[f, h, d], w.iter().flat_map(|m| flatten(m)).collect()).unwrap();
        let got = conv1d_relu(&input, &filters, &b).unwrap();
        let want = conv_oracle(&x, &w, &b);
        assert_eq!(got.shape(), &[want.len(), f]);
        for (g, e) in got.data().iter().zip(flatten(&want)) {
            assert!((g - e).abs() <= 1e-12, "{g} vs {e}");
        }
    }
}

#[test]
fn conv_rejects_short_input() {
    let input = Array::<f64>::zeros(&[2, 3]);
    let filters = Array::<f64>::zeros(&[1, 3, 3]);
    assert!(conv1d_relu(&input, &filters, &[0.0]).is_err());
}

proptest! {
    #[test]
    fn max_pool_is_columnwise_max(rows in 1usize..8, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let maps = Array::from_vec(&[rows, cols], data.clone()).unwrap();
        let (vals, arg) = max_pool(&maps).unwrap();
        for c in 0..cols {
            let col: Vec<f64> = (0..rows).map(|r| data[r * cols + c]).collect();
            let m = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(vals[c], m);
            prop_assert_eq!(arg[c], col.iter().position(|&v| v == m).unwrap());
        }
    }
}

fn small_vocabs(words: usize, pos: usize, clip: i32) -> FeatureVocabs {
    let mut word = Vocab::new();
    for i in 0..words {
        word.insert(&format!("w{i}"));
    }
    let mut tags = Vocab::new();
    for i in 0..pos {
        tags.insert(&format!("P{i}"));
    }
    FeatureVocabs {
        word,
        pos: tags,
        etype: etype_vocab(),
        relpos: RelposVocab::new(clip),
    }
}

fn random_example(rng: &mut ChaCha8Rng, n: usize, vocabs: &FeatureVocabs) -> Example {
    let clip = vocabs.relpos.clip();
    let tokens = (0..n)
        .map(|_| TokenFeatures {
            word: rng.gen_range(1..vocabs.word.len() as u32),
            relpos1: rng.gen_range(-clip - 3..=clip + 3),
            relpos2: rng.gen_range(-clip - 3..=clip + 3),
            etype: rng.gen_range(1..vocabs.etype.len() as u32),
            pos: rng.gen_range(1..vocabs.pos.len() as u32),
        })
        .collect();
    Example {
        tokens,
        label: RelationLabel::None,
        provenance: Provenance {
            doc_id: "d".into(),
            arg1: "T1".into(),
            arg2: "T2".into(),
            text_order: true,
        },
    }
}

fn small_model(rng: &mut ChaCha8Rng, mask: FeatureMask) -> (CnnModel<f64>, Hyperparams) {
    let hp = Hyperparams {
        word_dim: 6,
        feat_dim: 3,
        filter_height: 3,
        n_filters: 5,
        feature_mask: mask,
        relpos_clip: 4,
        ..Hyperparams::default()
    };
    let labels = LabelSet::new(OrderingStrategy::FixedOrder, ClassFilter::All);
    let model = CnnModel::new(&hp, labels, small_vocabs(9, 4, hp.relpos_clip), None, rng).unwrap();
    (model, hp)
}

#[test]
fn model_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for mask in ["w", "w,rp", "w,rp,et,pos", "rp,pos"] {
        let (mut model, _) = small_model(&mut rng, mask.parse().unwrap());
        // push biases positive so most ReLUs are live
        let k = model.channels.len();
        model.params.get_mut(k + 1).fill(0.05);
        let example = random_example(&mut rng, 7, &model.vocabs);
        let mut obj = ExampleObjective {
            model,
            example,
            class: 2,
        };
        let report = grad_check(&mut obj, 1e-5, 60, &mut rng);
        assert!(report.max_rel_err() < 1e-4, "{mask}: {report:?}");
        assert!(report.params.iter().all(|p| p.checked > 0), "{mask}: {report:?}");
    }
}

#[test]
fn short_examples_are_padded_to_filter_height() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (model, hp) = small_model(&mut rng, FeatureMask::ALL);
    let ex = random_example(&mut rng, 1, &model.vocabs);
    let ids = model.channel_ids(&ex);
    assert!(ids.iter().all(|c| c.len() == hp.filter_height && c[1..].iter().all(|&i| i == 0)));
    let p = model.probabilities(&ex).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn zero_model_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (model, _) = small_model(&mut rng, FeatureMask::ALL);
    let zero = model.zeroed();
    let ex = random_example(&mut rng, 6, &zero.vocabs);
    let p = zero.probabilities(&ex).unwrap();
    let c = p.len() as f64;
    assert!(p.iter().all(|&v| (v - 1.0 / c).abs() < 1e-12), "{p:?}");
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (model, _) = small_model(&mut rng, "w,rp,et".parse().unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    model.save(&path).unwrap();
    let back = CnnModel::<f64>::load(&path).unwrap();
    assert_eq!(back, model);
    let again = dir.path().join("again.ckpt");
    back.save(&again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    let ex = random_example(&mut rng, 5, &model.vocabs);
    assert_eq!(back.probabilities(&ex).unwrap(), model.probabilities(&ex).unwrap());

    let single: CnnModel<f32> = model.cast();
    let p32 = single.probabilities(&ex).unwrap();
    for (a, b) in p32.iter().zip(model.probabilities(&ex).unwrap()) {
        assert!((*a as f64 - b).abs() < 1e-5);
    }
}

#[test]
fn tampered_checkpoint_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (model, _) = small_model(&mut rng, FeatureMask::ALL);
    let mut ckpt = model.to_checkpoint();
    ckpt.header["hyperparams"]["n_filters"] = 6.into();
    assert!(CnnModel::<f64>::from_checkpoint(&ckpt).is_err());

    let mut ckpt = model.to_checkpoint();
    ckpt.arrays.retain(|(n, _)| n != "dense.b");
    let bytes = ckpt.to_bytes().unwrap();
    let read = Checkpoint::read_from(&bytes[..]).unwrap();
    assert!(CnnModel::<f64>::from_checkpoint(&read).is_err());
}
