use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use ragqa::config::AppConfig;
use ragqa::corpus::{
    bfs_collect, clean_text, filter_news, parse_categorylinks, parse_id_map, read_graph_jsonl, write_graph_jsonl,
    Corpus, Document, NewsFilter, Passage, RawDocument, Source,
};
use ragqa::eval::{canonical_grid, evaluate, run_experiment_grid, ExperimentConfig, GridReader, KbKind};
use ragqa::qa::{
    filter_dataset, split_dataset, translate_pairs, DictionaryTranslator, HttpTranslator, IdentityTranslator,
    KeywordRuleSet, Language, Origin, QAPair, SplitRatios, Translator,
};
use ragqa::reader::{answer, default_budget, Mode, ReaderConfig, ReaderKind, DEFAULT_MAX_SPAN};
use ragqa::retriever::{load_index, save_index};
use ragqa::{Error, Index, Kb, Params, Report, Result};

use crate::io::{guard_outputs, passages_beside, read_to_string, write_atomic, write_json, write_jsonl};
use crate::*;

pub fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let app = AppConfig::resolve(cli.app_config.as_deref())?;
    match cli.command {
        Command::IngestWiki(a) => ingest_wiki(a)?,
        Command::IngestNews(a) => ingest_news(a)?,
        Command::FilterQa(a) => filter_qa(a, &app)?,
        Command::TranslateQa(a) => return translate_qa(a),
        Command::SplitQa(a) => split_qa(a, &app)?,
        Command::BuildIndex(a) => build_index(a, &app)?,
        Command::Retrieve(a) => retrieve(a, &app)?,
        Command::Ask(a) => ask(a, &app)?,
        Command::Evaluate(a) => evaluate_one(a, &app)?,
        Command::RunGrid(a) => run_grid(a, &app)?,
    }
    Ok(())
}

fn required(flag: Option<PathBuf>, fallback: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| fallback.clone())
        .ok_or_else(|| Error::Config(format!("--{name} is required (or set it in the config file)")))
}

fn corpus_for(c: &ChunkArgs) -> Result<Corpus> {
    if c.passage_size == 0 {
        return Err(Error::Config("--passage-size must be positive".into()));
    }
    Ok(Corpus::with_id_bases(c.passage_size, c.doc_id_start, c.passage_id_start))
}

fn write_corpus(corpus: Corpus, out: &Path, passages_out: &Path) -> Result<()> {
    let (docs, passages) = corpus.into_parts();
    write_jsonl(out, &docs)?;
    write_jsonl(passages_out, &passages)?;
    log::info!("wrote {} documents and {} passages", docs.len(), passages.len());
    Ok(())
}

fn ingest_wiki(a: IngestWikiArgs) -> Result<()> {
    let mut inputs = vec![a.articles.as_path()];
    inputs.extend(a.graph.as_deref());
    inputs.extend(a.categorylinks.as_deref());
    inputs.extend(a.id_map.as_deref());
    let mut outputs = vec![a.out.as_path(), a.passages_out.as_path()];
    outputs.extend(a.graph_out.as_deref());
    guard_outputs(&inputs, &outputs)?;

    let graph = match (&a.graph, &a.categorylinks, &a.id_map) {
        (Some(g), _, _) => read_graph_jsonl(ragqa::jsonl::open(g)?)?,
        (None, Some(dump), Some(map)) => {
            let ids = parse_id_map(ragqa::jsonl::open(map)?)?;
            let (graph, report) = parse_categorylinks(ragqa::jsonl::open(dump)?, &ids)?;
            log::info!(
                "category links: {} pages, {} subcategories, {} ignored, {} malformed, {} unresolved",
                report.pages,
                report.subcats,
                report.ignored,
                report.malformed,
                report.unresolved
            );
            graph
        }
        _ => return Err(Error::Config("give --graph, or --categorylinks with --id-map".into())),
    };
    if let Some(path) = &a.graph_out {
        let mut buf = Vec::new();
        write_graph_jsonl(&graph, &mut buf)?;
        write_atomic(path, &buf)?;
    }

    let ids = bfs_collect(&graph, &a.root, a.limit)?;
    log::info!("collected {} article ids under {}", ids.len(), a.root);
    let mut articles: HashMap<u64, RawDocument> = HashMap::new();
    for raw in ragqa::jsonl::read_path::<RawDocument>(&a.articles)? {
        if let Some(id) = raw.id {
            articles.entry(id).or_insert(raw);
        }
    }
    let mut corpus = corpus_for(&a.chunking)?;
    let (mut missing, mut empty) = (0, 0);
    for id in ids {
        match articles.remove(&id) {
            Some(raw) => {
                if corpus.ingest(raw, Source::Wiki).is_none() {
                    empty += 1;
                }
            }
            None => missing += 1,
        }
    }
    if missing + empty > 0 {
        log::warn!("{missing} collected ids had no article record, {empty} articles were empty after cleaning");
    }
    write_corpus(corpus, &a.out, &a.passages_out)
}

fn ingest_news(a: IngestNewsArgs) -> Result<()> {
    let mut outputs = vec![a.out.as_path(), a.passages_out.as_path()];
    outputs.extend(a.report.as_deref());
    guard_outputs(&[&a.input, &a.keywords], &outputs)?;

    let filter: NewsFilter = serde_json::from_str(&read_to_string(&a.keywords)?)
        .map_err(|e| Error::Config(format!("{}: {e}", a.keywords.display())))?;
    let mut empty = 0;
    let docs: Vec<Document> = ragqa::jsonl::read_path::<RawDocument>(&a.input)?
        .into_iter()
        .filter_map(|raw| {
            let Some(body) = clean_text(&raw.body) else {
                empty += 1;
                return None;
            };
            Some(Document {
                id: 0,
                source: Source::News,
                title: clean_text(&raw.title).unwrap_or_default(),
                body,
                published_at: raw.published_at,
                url: raw.url,
                keywords_matched: Vec::new(),
            })
        })
        .collect();
    if empty > 0 {
        log::warn!("{empty} news records were empty after cleaning");
    }
    let (kept, report) = filter_news(docs, &filter, a.min_date);
    log::info!(
        "news: scanned {}, kept {}, too old {}, no keyword {}, excluded {}",
        report.scanned,
        report.kept,
        report.dropped_date,
        report.dropped_no_keyword,
        report.dropped_excluded
    );
    let mut corpus = corpus_for(&a.chunking)?;
    for doc in kept {
        corpus.push(doc);
    }
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    write_corpus(corpus, &a.out, &a.passages_out)
}

fn filter_qa(a: FilterQaArgs, app: &AppConfig) -> Result<()> {
    let rules_path = required(a.rules, &app.paths.rules, "rules")?;
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(a.report.as_deref());
    guard_outputs(&[&rules_path, &a.input], &outputs)?;

    let rules = KeywordRuleSet::from_json(&read_to_string(&rules_path)?)?;
    let origin = match a.origin {
        OriginArg::Paq => Origin::Paq,
        OriginArg::Msmarco => Origin::Msmarco,
    };
    let mut tmp = a.out.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let writer = BufWriter::new(File::create(&tmp).map_err(|e| Error::file(&tmp, e))?);
    let report = filter_dataset(ragqa::jsonl::open(&a.input)?, origin, &rules, writer)?;
    std::fs::rename(&tmp, &a.out).map_err(|e| Error::file(&a.out, e))?;
    log::info!("selected {} of {} pairs ({} malformed lines)", report.selected, report.scanned, report.malformed);
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    Ok(())
}

fn translate_qa(a: TranslateQaArgs) -> std::result::Result<(), Failure> {
    guard_outputs(&[&a.input], &[&a.out, &a.rejects])?;
    let timeout = seconds(a.timeout)?;
    let provider: Box<dyn Translator> = match a.provider {
        ProviderArg::Identity => Box::new(IdentityTranslator),
        ProviderArg::Dictionary => {
            let path = a.dictionary.as_deref().expect("required by clap");
            let words: HashMap<String, String> = serde_json::from_str(&read_to_string(path)?)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            Box::new(DictionaryTranslator::new(Language::Pt, words))
        }
        ProviderArg::Http => {
            let endpoint = a.translate_endpoint.clone().expect("required by clap");
            Box::new(HttpTranslator::new(endpoint, Language::En, Language::Pt, timeout)?)
        }
    };
    let pairs: Vec<QAPair> = ragqa::qa::read_pairs(ragqa::jsonl::open(&a.input)?, Origin::Paq)
        .filter_map(|item| match item {
            Ok(Ok(pair)) => Some(Ok(pair)),
            Ok(Err(line)) => {
                log::warn!("skipping malformed QA line {line}");
                None
            }
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_>>()?;
    let out = translate_pairs(pairs, provider.as_ref(), a.retries);
    write_jsonl(&a.out, &out.pairs)?;
    write_jsonl(&a.rejects, &out.rejected)?;
    log::info!("translated {} pairs, rejected {}", out.pairs.len(), out.rejected.len());
    if out.is_clean() {
        Ok(())
    } else {
        Err(Failure::Partial(format!(
            "{} pairs could not be translated; see {}",
            out.rejected.len(),
            a.rejects.display()
        )))
    }
}

fn split_qa(a: SplitQaArgs, app: &AppConfig) -> Result<()> {
    let input = a
        .input
        .ok_or_else(|| Error::Config("--in is required".into()))?;
    let names = ["train", "validation", "test"].map(|s| a.out_dir.join(format!("qa_pairs.{s}.jsonl")));
    guard_outputs(&[&input], &names.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;

    let pairs: Vec<QAPair> = ragqa::jsonl::read_path(&input)?;
    let ratios = SplitRatios { train: a.train, validation: a.validation, test: a.test };
    let splits = split_dataset(pairs, ratios, a.seed.unwrap_or(app.seed))?;
    for (path, part) in names.iter().zip([&splits.train, &splits.validation, &splits.test]) {
        write_jsonl(path, part)?;
    }
    log::info!(
        "split into {} train, {} validation, {} test",
        splits.train.len(),
        splits.validation.len(),
        splits.test.len()
    );
    Ok(())
}

fn read_passages(paths: &[PathBuf]) -> Result<Vec<Passage>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(ragqa::jsonl::read_path::<Passage>(p)?);
    }
    Ok(all)
}

fn build_index(a: BuildIndexArgs, app: &AppConfig) -> Result<()> {
    let sidecar = passages_beside(&a.out);
    let inputs: Vec<&Path> = a.passages.iter().map(PathBuf::as_path).collect();
    guard_outputs(&inputs, &[&a.out, &sidecar])?;

    let passages = read_passages(&a.passages)?;
    let params = Params::new(a.k1.unwrap_or(app.k1), a.b.unwrap_or(app.b))?;
    let index = Index::build(&passages, params)?;
    let mut tmp = a.out.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    save_index(&index, &tmp)?;
    std::fs::rename(&tmp, &a.out).map_err(|e| Error::file(&a.out, e))?;
    write_jsonl(&sidecar, &passages)?;
    log::info!(
        "indexed {} passages (average length {:.1}) into {}",
        index.passage_count(),
        index.avg_length(),
        a.out.display()
    );
    Ok(())
}

fn kb_from(args: &KbArgs, app: &AppConfig) -> Result<Kb> {
    let index = required(args.index.clone(), &app.paths.index, "index")?;
    let passages = if !args.passages.is_empty() {
        args.passages.clone()
    } else if let Some(p) = &app.paths.passages {
        vec![p.clone()]
    } else {
        vec![passages_beside(&index)]
    };
    let mut inputs = vec![index.as_path()];
    inputs.extend(passages.iter().map(PathBuf::as_path));
    ragqa::config::require_existing(inputs)?;
    let loaded: Index = load_index(&index)?;
    let texts = read_passages(&passages)?;
    let known: HashSet<u64> = texts.iter().map(|p| p.passage_id).collect();
    if let Some((id, _)) = loaded.passage_lengths().find(|(id, _)| !known.contains(id)) {
        return Err(Error::UnknownPassage(id));
    }
    Ok(Kb::new(loaded, texts))
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Error::Config(format!("invalid timeout {s}")))
}

fn endpoint(remote: &RemoteArgs, app: &AppConfig) -> Option<String> {
    remote.endpoint.clone().or_else(|| app.endpoint.clone())
}

fn reader_kind(r: ReaderArg) -> ReaderKind {
    match r {
        ReaderArg::Extractive => ReaderKind::Extractive,
        ReaderArg::Remote => ReaderKind::RemoteGenerative,
    }
}

fn retrieve(a: RetrieveArgs, app: &AppConfig) -> Result<()> {
    let kb = kb_from(&a.kb, app)?;
    for hit in kb.index.retrieve(&a.query, a.k.unwrap_or(app.k)) {
        let line = serde_json::json!({
            "rank": hit.rank,
            "passage_id": hit.passage_id,
            "score": hit.score,
            "text": kb.text(hit.passage_id),
        });
        println!("{line}");
    }
    Ok(())
}

fn ask(a: AskArgs, app: &AppConfig) -> Result<()> {
    let mode = match a.mode {
        ModeArg::ReaderOnly => Mode::ReaderOnly,
        ModeArg::RetrieverReader => Mode::RetrieverReader,
    };
    let k = if mode == Mode::ReaderOnly { 0 } else { a.k.unwrap_or(app.k) };
    let cfg = ReaderConfig {
        mode,
        reader_kind: reader_kind(a.reader),
        k,
        token_budget: a.budget.unwrap_or_else(|| default_budget(k)),
        endpoint: endpoint(&a.remote, app),
        timeout: seconds(a.remote.timeout)?,
        max_span: DEFAULT_MAX_SPAN,
    };
    let kb = match mode {
        Mode::ReaderOnly => None,
        Mode::RetrieverReader => Some(kb_from(&a.kb, app)?),
    };
    let reply = answer(&a.question, &cfg, kb.as_ref())?;
    println!("{}", serde_json::to_string(&reply)?);
    Ok(())
}

fn read_test(flag: Option<PathBuf>, app: &AppConfig) -> Result<(PathBuf, Vec<QAPair>)> {
    let path = required(flag, &app.paths.qa_test, "test")?;
    ragqa::config::require_existing([path.as_path()])?;
    let pairs = ragqa::jsonl::read_path(&path)?;
    Ok((path, pairs))
}

fn evaluate_one(a: EvaluateArgs, app: &AppConfig) -> Result<()> {
    let (test_path, test) = read_test(a.test, app)?;
    guard_outputs(&[&test_path, &a.config], &[&a.out])?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&read_to_string(&a.config)?)
        .map_err(|e| Error::Config(format!("{}: {e}", a.config.display())))?;
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    if let Some(r) = a.reader {
        cfg.reader_kind = reader_kind(r);
    }
    cfg.validate()?;

    let kb = match cfg.kb {
        KbKind::None => None,
        _ => Some(kb_from(&a.kb, app)?),
    };
    let rc = ReaderConfig {
        mode: if kb.is_some() { Mode::RetrieverReader } else { Mode::ReaderOnly },
        reader_kind: cfg.reader_kind,
        k: cfg.k,
        token_budget: cfg.budget,
        endpoint: endpoint(&a.remote, app),
        timeout: seconds(a.remote.timeout)?,
        max_span: DEFAULT_MAX_SPAN,
    };
    rc.validate(kb.is_some())?;
    let report: Report = evaluate(&test, |q| answer(q, &rc, kb.as_ref()).map(|r| r.answer), &cfg)?;
    write_json(&a.out, &report)?;
    if !report.failures.is_empty() {
        log::warn!("{} questions failed and were scored as empty answers", report.failures.len());
    }
    println!(
        "F1 {:.1}  EM {:.1}  R-L {:.1}  ({} questions)",
        report.aggregates.f1,
        report.aggregates.em,
        report.aggregates.rouge_l,
        report.per_question.len()
    );
    Ok(())
}

fn run_grid(a: RunGridArgs, app: &AppConfig) -> Result<()> {
    let (_, test) = read_test(a.test, app)?;
    let seed = a.seed.unwrap_or(app.seed);
    let grid: Vec<ExperimentConfig> = match &a.grid {
        Some(path) => serde_json::from_str(&read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        None => canonical_grid(reader_kind(a.reader), seed),
    };
    let mut kbs = HashMap::new();
    for (kind, path) in [(KbKind::Wiki, &a.wiki_index), (KbKind::News, &a.news_index), (KbKind::WikiNews, &a.wiki_news_index)] {
        if let Some(p) = path {
            let args = KbArgs { index: Some(p.clone()), passages: Vec::new() };
            kbs.insert(kind, kb_from(&args, app)?);
        }
    }
    let reader = GridReader { endpoint: endpoint(&a.remote, app), timeout: seconds(a.remote.timeout)?, max_span: DEFAULT_MAX_SPAN };
    let outcome = run_experiment_grid(&grid, &test, &kbs, &reader)?;
    outcome.write_to(&a.out_dir)?;
    for skip in &outcome.skipped {
        log::warn!("grid entry {} skipped: {}", skip.position, skip.reason);
    }
    print!("{}", outcome.render_table());
    Ok(())
}
