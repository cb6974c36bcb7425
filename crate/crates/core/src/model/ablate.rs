use serde::Serialize;

use super::{evaluate_documents, train, FeatureMask, Hyperparams, ModelError, WordInit};
use crate::eval::ScoreReport;
use crate::textproc::PreparedDoc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationConfig {
    pub name: String,
    pub hp: Hyperparams,
}

/// The feature ladder `w`, `w+rp`, `w+rp+et`, `w+rp+et+pos` without rules, the full
/// model with rules, then the full model with each preprocessing switch turned off.
pub fn ablation_grid(base: &Hyperparams) -> Vec<AblationConfig> {
    let mut grid = Vec::new();
    let mut mask = FeatureMask {
        word: true,
        relpos: false,
        etype: false,
        pos: false,
    };
    let ladder: [fn(&mut FeatureMask); 4] = [|_| {}, |m| m.relpos = true, |m| m.etype = true, |m| m.pos = true];
    for step in ladder {
        step(&mut mask);
        grid.push(AblationConfig {
            name: mask.to_string(),
            hp: Hyperparams {
                feature_mask: mask,
                rules: false,
                ..base.clone()
            },
        });
    }
    let full = Hyperparams {
        feature_mask: FeatureMask::ALL,
        rules: true,
        ..base.clone()
    };
    grid.push(AblationConfig {
        name: format!("{}+rules", FeatureMask::ALL),
        hp: full.clone(),
    });
    grid.push(AblationConfig {
        name: "-bracket_deletion".into(),
        hp: Hyperparams {
            bracket_deletion: false,
            ..full.clone()
        },
    });
    grid.push(AblationConfig {
        name: "-sentence_cutting".into(),
        hp: Hyperparams {
            sentence_cutting: false,
            ..full
        },
    });
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub name: String,
    pub hp: Hyperparams,
    pub best_epoch: usize,
    pub dev: ScoreReport,
    pub test: Option<ScoreReport>,
}

/// Trains and scores every configuration. Each run starts from its own seed, so
/// rows are independent of grid order.
pub fn ablate(
    grid: &[AblationConfig],
    train_docs: &[PreparedDoc],
    dev_docs: &[PreparedDoc],
    test_docs: Option<&[PreparedDoc]>,
    word_init: &WordInit,
) -> Result<Vec<AblationRow>, ModelError> {
    grid.iter()
        .map(|cfg| {
            log::info!("ablation `{}`", cfg.name);
            let (model, history) = train::<f64>(train_docs, dev_docs, &cfg.hp, word_init)?;
            let dev = evaluate_documents(&model, dev_docs, cfg.hp.rules)?;
            let test = test_docs
                .map(|docs| evaluate_documents(&model, docs, cfg.hp.rules))
                .transpose()?;
            Ok(AblationRow {
                name: cfg.name.clone(),
                hp: cfg.hp.clone(),
                best_epoch: history.best_epoch,
                dev,
                test,
            })
        })
        .collect()
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = String::from(
        "config,feature_mask,rules,bracket_deletion,sentence_cutting,seed,best_epoch,dev_precision,dev_recall,dev_micro_f1,test_micro_f1\n",
    );
    for r in rows {
        let test = r.test.map_or(String::new(), |t| format!("{:.4}", t.micro.f1));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{}\n",
            r.name,
            r.hp.feature_mask,
            r.hp.rules,
            r.hp.bracket_deletion,
            r.hp.sentence_cutting,
            r.hp.seed,
            r.best_epoch,
            r.dev.micro.precision,
            r.dev.micro.recall,
            r.dev.micro.f1,
            test
        ));
    }
    out
}
