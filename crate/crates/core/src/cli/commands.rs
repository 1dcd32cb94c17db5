use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::args::{
    BuildDatasetArgs, Command, CompareArgs, DataArgs, EvalArgs, GradcheckArgs, ModelArg, PredictArgs, RunArgs, TaskArg,
};
use crate::baselines::{
    extract_function_features, function_features_csv, provenance_features_csv, FunctionBaseline, ProvenanceBaseline,
};
use crate::corpus::{
    build_provenance_dataset, grouped_kfold, load_annotations, load_function_corpus, load_papers_dir,
    load_provenance_corpus, save_provenance_corpus, select_candidates, ungrouped_kfold, CuePhraseTable,
    FunctionInstance, LexiconScorer, ProvenanceInstance, SentimentScorer,
};
use crate::error::{Error, Result};
use crate::eval::{
    compare_models, cross_validate, cross_validate_joint, render_table, EvalReport, TableRow, THREADS_ENV,
};
use crate::models::check::{check_random_model, CheckSetup, Coverage};
use crate::models::{
    predict_function, predict_mtl_function, predict_mtl_provenance, predict_provenance, Fitted, ModelCheckpoint,
    ModelKind, NeuralModel, Prediction,
};
use crate::text::{load_embeddings, EmbeddingTable, SequenceMatrix};
use crate::util::write_atomic;

pub fn run(command: Command) -> Result<()> {
    configure_threads()?;
    match command {
        Command::BuildDataset(a) => build_dataset(&a),
        Command::Train(a) => train(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Compare(a) => compare(&a),
        Command::Predict(a) => predict(&a),
        Command::Gradcheck(a) => gradcheck(&a),
    }
}

fn configure_threads() -> Result<()> {
    if std::env::var_os(THREADS_ENV).is_some() {
        let pool = crate::eval::thread_pool()?;
        let n = pool.current_num_threads();
        // A global pool may already exist when embedded in another program.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    seeds: Vec<u64>,
}

fn write_manifest<C: Serialize>(out: &Path, command: &str, config: &C, seeds: Vec<u64>) -> Result<()> {
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        seeds,
    };
    write_json(&out.join("manifest.json"), &m)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, why: &str) -> Result<&'a Path> {
    let p = path
        .as_deref()
        .ok_or_else(|| Error::invalid(format!("--{flag} is required {why}")))?;
    if !p.exists() {
        return Err(Error::io(
            p,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    Ok(p)
}

fn check_compatible(task: TaskArg, model: ModelArg) -> Result<()> {
    if model.native_task() != task {
        return Err(Error::invalid(format!("model {model:?} does not solve task {task:?}",)));
    }
    Ok(())
}

/// Everything a run reads from disk.
struct Inputs {
    function: Vec<FunctionInstance>,
    provenance: Vec<ProvenanceInstance>,
    table: Option<EmbeddingTable>,
}

fn load_provenance(data: &DataArgs, corpus: Option<&Path>, seed: u64) -> Result<Vec<ProvenanceInstance>> {
    if data.annotations.is_some() || data.papers.is_some() {
        let annotations = load_annotations(require(&data.annotations, "annotations", "together with --papers")?)?;
        let papers = load_papers_dir(require(&data.papers, "papers", "together with --annotations")?)?;
        return build_provenance_dataset(&annotations, &papers, data.negatives_per_paper, seed);
    }
    match corpus {
        Some(p) => load_provenance_corpus(p),
        None => Err(Error::invalid(
            "provenance data needs --annotations and --papers, or a provenance dataset file",
        )),
    }
}

fn load_inputs(run: &RunArgs, needs: (bool, bool)) -> Result<Inputs> {
    let data = &run.data;
    let (want_function, want_provenance) = needs;
    let function = if want_function {
        load_function_corpus(require(&data.corpus, "corpus", "for the function task")?)?
    } else {
        Vec::new()
    };
    let provenance = if want_provenance {
        let corpus = if want_function {
            &data.provenance_corpus
        } else {
            &data.corpus
        };
        let checked = match corpus {
            Some(_) => Some(require(corpus, "provenance-corpus", "")?),
            None => None,
        };
        load_provenance(data, checked, run.train.seed)?
    } else {
        Vec::new()
    };
    let table = if run.model.is_neural() {
        let path = require(&data.embeddings, "embeddings", "for neural models")?;
        Some(load_embeddings(path, data.embedding_dim)?)
    } else {
        None
    };
    Ok(Inputs {
        function,
        provenance,
        table,
    })
}

fn needs(model: ModelArg) -> (bool, bool) {
    match model.native_task() {
        TaskArg::Function => (true, false),
        TaskArg::Provenance => (false, true),
        TaskArg::Mtl => (true, true),
    }
}

fn needs_all(models: &[ModelArg]) -> (bool, bool) {
    models.iter().fold((false, false), |(f, p), m| {
        let (a, b) = needs(*m);
        (f || a, p || b)
    })
}

// ---------------------------------------------------------------- train

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum BaselineFile {
    NbBaseline(FunctionBaseline),
    TreeBaseline(ProvenanceBaseline),
}

fn loss_csv(fitted: &Fitted) -> String {
    let mut out = String::new();
    match &fitted.task_losses {
        Some(h) => {
            out.push_str("epoch,loss,function_loss,provenance_loss\n");
            for (e, ((a, f), p)) in h.averaged.iter().zip(&h.function).zip(&h.provenance).enumerate() {
                out.push_str(&format!("{},{a},{f},{p}\n", e + 1));
            }
        }
        None => {
            out.push_str("epoch,loss\n");
            for (e, l) in fitted.losses.iter().enumerate() {
                out.push_str(&format!("{},{l}\n", e + 1));
            }
        }
    }
    out
}

fn train(a: &RunArgs) -> Result<()> {
    check_compatible(a.task, a.model)?;
    let inputs = load_inputs(a, needs(a.model))?;
    let config = a.train.config(a.train.seed);
    let f: Vec<&FunctionInstance> = inputs.function.iter().collect();
    let p: Vec<&ProvenanceInstance> = inputs.provenance.iter().collect();
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    match a.model {
        ModelArg::NbBaseline => {
            let model = FunctionBaseline::fit(&f)?;
            let rows: Vec<_> = f
                .iter()
                .map(|i| (i.id.clone(), extract_function_features(i, &model.unigrams)))
                .collect();
            write_atomic(
                &a.out.join("features.csv"),
                function_features_csv(&model.unigrams, &rows).as_bytes(),
            )?;
            write_json(&a.out.join("model.json"), &BaselineFile::NbBaseline(model))?;
        }
        ModelArg::TreeBaseline => {
            let model = ProvenanceBaseline::fit(&p)?;
            let rows: Vec<_> = p
                .iter()
                .map(|i| (i.id.clone(), ProvenanceBaseline::features(i)))
                .collect();
            write_atomic(&a.out.join("features.csv"), provenance_features_csv(&rows).as_bytes())?;
            write_json(&a.out.join("model.json"), &BaselineFile::TreeBaseline(model))?;
        }
        ModelArg::Cnn | ModelArg::Dcnn | ModelArg::Mtl => {
            let table = inputs.table.as_ref().expect("neural models load embeddings");
            let fitted = match a.model {
                ModelArg::Cnn => Fitted::cnn(table, &f, &[], &config)?,
                ModelArg::Dcnn => Fitted::dcnn(table, &p, &[], &config)?,
                _ => Fitted::mtl(table, (&f, &p), (&[], &[]), &config)?,
            };
            let ckpt = ModelCheckpoint::new(&fitted.model, &fitted.featurizer, config.window, config.filters);
            ckpt.save(&a.out, &fitted.featurizer.vocab)?;
            write_atomic(&a.out.join("loss.csv"), loss_csv(&fitted).as_bytes())?;
        }
    }
    write_manifest(&a.out, "train", a, vec![a.train.seed])
}

// ------------------------------------------------------------- evaluate

fn run_seeds(base: u64, runs: usize) -> Vec<u64> {
    (0..runs as u64).map(|r| base.wrapping_add(r)).collect()
}

fn function_group(i: &FunctionInstance) -> String {
    if i.citing_paper_id.is_empty() {
        i.id.clone()
    } else {
        i.citing_paper_id.clone()
    }
}

/// Cross-validation reports keyed by task name.
type Reports = BTreeMap<&'static str, EvalReport>;

fn evaluate_model(model: ModelArg, inputs: &Inputs, e: &EvalArgs, seeds: &[u64]) -> Result<Reports> {
    let k = e.k;
    let train = &e.run.train;
    let table = inputs.table.as_ref();
    let f_data = &inputs.function;
    let p_data = &inputs.provenance;
    let split_f = |s: u64| {
        if e.group_function_folds {
            grouped_kfold(f_data, k, function_group, s)
        } else {
            ungrouped_kfold(f_data, k, s)
        }
    };
    let split_p = |s: u64| grouped_kfold(p_data, k, |i: &ProvenanceInstance| i.cited_paper_id.clone(), s);
    let table_or_err = || table.ok_or_else(|| Error::invalid("neural models need --embeddings"));
    let mut reports = Reports::new();
    match model {
        ModelArg::NbBaseline => {
            let r = cross_validate(f_data, split_f, seeds, |tr, te, _| {
                let m = FunctionBaseline::fit(tr)?;
                te.iter().map(|i| m.predict(i)).collect()
            })?;
            reports.insert("function", r);
        }
        ModelArg::TreeBaseline => {
            let r = cross_validate(p_data, split_p, seeds, |tr, te, _| {
                let m = ProvenanceBaseline::fit(tr)?;
                Ok(te.iter().map(|i| m.predict(i)).collect())
            })?;
            reports.insert("provenance", r);
        }
        ModelArg::Cnn => {
            let table = table_or_err()?;
            let r = cross_validate(f_data, split_f, seeds, |tr, te, seed| {
                Fitted::cnn(table, tr, te, &train.config(seed))?.predict_function(te)
            })?;
            reports.insert("function", r);
        }
        ModelArg::Dcnn => {
            let table = table_or_err()?;
            let r = cross_validate(p_data, split_p, seeds, |tr, te, seed| {
                Fitted::dcnn(table, tr, te, &train.config(seed))?.predict_provenance(te)
            })?;
            reports.insert("provenance", r);
        }
        ModelArg::Mtl => {
            let table = table_or_err()?;
            let (rf, rp) =
                cross_validate_joint(f_data, p_data, split_f, split_p, seeds, |ftr, fte, ptr, pte, seed| {
                    let fitted = Fitted::mtl(table, (ftr, ptr), (fte, pte), &train.config(seed))?;
                    Ok((fitted.predict_function(fte)?, fitted.predict_provenance(pte)?))
                })?;
            reports.insert("function", rf);
            reports.insert("provenance", rp);
        }
    }
    Ok(reports)
}

fn model_name(m: ModelArg) -> String {
    serde_json::to_value(m)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_else(|| format!("{m:?}"))
}

fn tables(rows: &BTreeMap<&'static str, Vec<TableRow>>) -> String {
    rows.iter()
        .map(|(task, r)| render_table(&format!("{task} (weighted, %)"), r))
        .collect::<Vec<_>>()
        .join("\n")
}

fn validate_eval(e: &EvalArgs) -> Result<()> {
    if e.runs == 0 {
        return Err(Error::invalid("--runs must be at least 1"));
    }
    if e.k < 2 {
        return Err(Error::invalid("--k must be at least 2"));
    }
    e.run.train.config(0).validate()
}

fn evaluate(e: &EvalArgs) -> Result<()> {
    check_compatible(e.run.task, e.run.model)?;
    validate_eval(e)?;
    let inputs = load_inputs(&e.run, needs(e.run.model))?;
    let seeds = run_seeds(e.run.train.seed, e.runs);
    let reports = evaluate_model(e.run.model, &inputs, e, &seeds)?;
    let out = &e.run.out;
    write_json(&out.join("metrics.json"), &reports)?;
    let mut rows: BTreeMap<&'static str, Vec<TableRow>> = BTreeMap::new();
    for (task, r) in &reports {
        rows.entry(task).or_default().push(TableRow {
            model: model_name(e.run.model),
            report: r,
            stars: String::new(),
        });
    }
    write_atomic(&out.join("metrics.txt"), tables(&rows).as_bytes())?;
    write_manifest(out, "evaluate", e, seeds)
}

fn report_task(model: ModelArg) -> &'static str {
    match model.native_task() {
        TaskArg::Provenance => "provenance",
        _ => "function",
    }
}

#[derive(Serialize)]
struct CompareOutput<'a> {
    task: &'a str,
    model: String,
    against: String,
    comparison: crate::eval::Comparison,
}

fn compare(c: &CompareArgs) -> Result<()> {
    let e = &c.eval;
    check_compatible(e.run.task, e.run.model)?;
    validate_eval(e)?;
    if c.against == e.run.model {
        return Err(Error::invalid("--against must name a different model"));
    }
    let task = match c.against.native_task() {
        TaskArg::Mtl => report_task(e.run.model),
        _ => report_task(c.against),
    };
    let mut run = e.run.clone();
    run.model = if e.run.model.is_neural() {
        e.run.model
    } else {
        c.against
    };
    let inputs = load_inputs(&run, needs_all(&[e.run.model, c.against]))?;
    let seeds = run_seeds(e.run.train.seed, e.runs);
    let a = evaluate_model(e.run.model, &inputs, e, &seeds)?;
    let b = evaluate_model(c.against, &inputs, e, &seeds)?;
    let (ra, rb) = match (a.get(task), b.get(task)) {
        (Some(ra), Some(rb)) => (ra, rb),
        _ => {
            return Err(Error::invalid(format!(
                "{} and {} do not share a task",
                model_name(e.run.model),
                model_name(c.against)
            )))
        }
    };
    let comparison = compare_models(ra, rb)?;
    let stars_for = |won: bool| if won { comparison.stars.clone() } else { String::new() };
    let rows = BTreeMap::from([(
        task,
        vec![
            TableRow {
                model: model_name(e.run.model),
                report: ra,
                stars: stars_for(comparison.winner == crate::eval::Winner::A),
            },
            TableRow {
                model: model_name(c.against),
                report: rb,
                stars: stars_for(comparison.winner == crate::eval::Winner::B),
            },
        ],
    )]);
    let out = &e.run.out;
    let metrics = BTreeMap::from([(model_name(e.run.model), &a), (model_name(c.against), &b)]);
    write_json(&out.join("metrics.json"), &metrics)?;
    write_json(
        &out.join("comparison.json"),
        &CompareOutput {
            task,
            model: model_name(e.run.model),
            against: model_name(c.against),
            comparison,
        },
    )?;
    write_atomic(&out.join("metrics.txt"), tables(&rows).as_bytes())?;
    write_manifest(out, "compare", c, seeds)
}

// -------------------------------------------------------- build-dataset

#[derive(Serialize)]
struct CandidateLine<'a> {
    line: usize,
    #[serde(flatten)]
    candidate: &'a crate::corpus::SelectedCandidate,
}

fn build_dataset(b: &BuildDatasetArgs) -> Result<()> {
    if b.annotations.is_none() && b.sentences.is_none() {
        return Err(Error::invalid(
            "nothing to build: pass --annotations/--papers and/or --sentences",
        ));
    }
    fs::create_dir_all(&b.out).map_err(|e| Error::io(&b.out, e))?;
    if b.annotations.is_some() || b.papers.is_some() {
        let annotations = load_annotations(require(&b.annotations, "annotations", "together with --papers")?)?;
        let papers = load_papers_dir(require(&b.papers, "papers", "together with --annotations")?)?;
        let data = build_provenance_dataset(&annotations, &papers, b.negatives_per_paper, b.seed)?;
        save_provenance_corpus(b.out.join("provenance.jsonl"), &data)?;
    }
    if b.sentences.is_some() {
        let path = require(&b.sentences, "sentences", "")?;
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scorer = LexiconScorer::default();
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| (i + 1, l))
            .collect();
        let scored: Vec<(String, f64)> = lines.iter().map(|(_, l)| (l.to_string(), scorer.score(l))).collect();
        let selected = select_candidates(&scored, &CuePhraseTable::default(), b.sentiment_cutoff)?;
        let mut buf = Vec::new();
        let mut cursor = 0;
        for cand in &selected {
            while scored[cursor].0 != cand.text {
                cursor += 1;
            }
            serde_json::to_writer(
                &mut buf,
                &CandidateLine {
                    line: lines[cursor].0,
                    candidate: cand,
                },
            )?;
            buf.push(b'\n');
            cursor += 1;
        }
        write_atomic(&b.out.join("candidates.jsonl"), &buf)?;
    }
    write_manifest(&b.out, "build-dataset", b, vec![b.seed])
}

// -------------------------------------------------------------- predict

#[derive(Deserialize)]
struct PredictInput {
    id: String,
    citing_sentence: String,
    #[serde(default)]
    fragment: Option<String>,
}

#[derive(Serialize)]
struct PredictOutput<'a> {
    id: &'a str,
    label: String,
    probabilities: &'a [f64],
}

fn predict(p: &PredictArgs) -> Result<()> {
    let (model, featurizer) = ModelCheckpoint::load(&p.checkpoint)?;
    let text = fs::read_to_string(&p.input).map_err(|e| Error::io(&p.input, e))?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: PredictInput = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: p.input.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        items.push(item);
    }
    let task = match (model.kind(), p.task) {
        (ModelKind::Cnn, None | Some(TaskArg::Function)) => TaskArg::Function,
        (ModelKind::Dcnn, None | Some(TaskArg::Provenance)) => TaskArg::Provenance,
        (ModelKind::Mtl, Some(t @ (TaskArg::Function | TaskArg::Provenance))) => t,
        (ModelKind::Mtl, _) => {
            return Err(Error::invalid(
                "a joint network needs --task function or --task provenance",
            ))
        }
        (kind, Some(t)) => return Err(Error::invalid(format!("a {kind:?} checkpoint cannot predict {t:?}"))),
    };
    let citing: Vec<SequenceMatrix> = items
        .iter()
        .map(|i| featurizer.embed_citing(&i.citing_sentence))
        .collect();
    let citing_refs: Vec<&SequenceMatrix> = citing.iter().collect();
    let rows: Vec<(String, Vec<f64>)> = if task == TaskArg::Function {
        let preds = match &model {
            NeuralModel::Cnn(m) => predict_function(m, &citing_refs)?,
            NeuralModel::Mtl(m) => predict_mtl_function(m, &citing_refs)?,
            NeuralModel::Dcnn(_) => unreachable!("checked above"),
        };
        labeled(preds)
    } else {
        let fragments = items
            .iter()
            .map(|i| {
                i.fragment
                    .as_deref()
                    .map(|f| featurizer.embed_fragment(f))
                    .ok_or_else(|| Error::invalid(format!("{}: provenance input needs a fragment", i.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(&SequenceMatrix, &SequenceMatrix)> = citing.iter().zip(&fragments).collect();
        let preds = match &model {
            NeuralModel::Dcnn(m) => predict_provenance(m, &pairs)?,
            NeuralModel::Mtl(m) => predict_mtl_provenance(m, &pairs)?,
            NeuralModel::Cnn(_) => unreachable!("checked above"),
        };
        labeled(preds)
    };
    let mut buf = Vec::new();
    for (item, (label, probs)) in items.iter().zip(&rows) {
        serde_json::to_writer(
            &mut buf,
            &PredictOutput {
                id: &item.id,
                label: label.clone(),
                probabilities: probs,
            },
        )?;
        buf.push(b'\n');
    }
    match &p.out {
        Some(path) => write_atomic(path, &buf),
        None => {
            print!("{}", String::from_utf8_lossy(&buf));
            Ok(())
        }
    }
}

fn labeled<L: std::fmt::Display>(preds: Vec<Prediction<L>>) -> Vec<(String, Vec<f64>)> {
    preds.into_iter().map(|p| (p.label.to_string(), p.probs)).collect()
}

// ------------------------------------------------------------ gradcheck

#[derive(Serialize)]
struct GradcheckLine<'a> {
    model: &'a str,
    #[serde(flatten)]
    report: &'a crate::nn::GradCheckReport,
    pass: bool,
}

fn gradcheck(g: &GradcheckArgs) -> Result<()> {
    let kind = match g.model {
        ModelArg::Cnn => ModelKind::Cnn,
        ModelArg::Dcnn => ModelKind::Dcnn,
        ModelArg::Mtl => ModelKind::Mtl,
        other => {
            return Err(Error::invalid(format!(
                "{} has no gradients to check",
                model_name(other)
            )))
        }
    };
    let setup = CheckSetup {
        window: g.window,
        filters: g.filters,
        width: g.width,
        dim: g.dim,
        batch: g.batch,
        epsilon: g.epsilon,
        seed: g.seed,
    };
    if g.width < g.window || g.batch == 0 || g.dim == 0 || g.filters == 0 {
        return Err(Error::invalid(
            "need width >= window and positive batch, dim and filters",
        ));
    }
    let coverage = match g.samples {
        Some(count) => Coverage::PerTensor { count, seed: g.seed },
        None => Coverage::All,
    };
    let reports = check_random_model(kind, setup, coverage)?;
    let mut failed = Vec::new();
    for (name, report) in &reports {
        let pass = report.max_rel_error < g.tolerance;
        println!(
            "{}",
            serde_json::to_string(&GradcheckLine {
                model: name,
                report,
                pass
            })?
        );
        if !pass {
            failed.push(name.as_str());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "relative error at or above {} for {}",
            g.tolerance,
            failed.join(", ")
        )))
    }
}
