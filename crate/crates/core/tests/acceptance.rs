//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ragqa::corpus::{bfs_collect, CategoryGraph, Corpus, RawDocument, Source};
use ragqa::eval::{exact_match, f1, rouge_l, rouge_l_tokens};
use ragqa::qa::{select_pair, split_dataset, KeywordRuleSet, Language, Origin, QAPair, Reason, SplitRatios};
use ragqa::reader::{answer, reformulate, extractive_answer, Mode, ReaderConfig, DEFAULT_MAX_SPAN};
use ragqa::retriever::{load_index, save_index, FORMAT_VERSION};
use ragqa::{Exact, Index, Kb, Params};

use common::{contains_answer, corpus_of, mini_corpus, mini_qa, raw_docs};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------------------
// BM25 against a direct evaluation of the formula.

struct Oracle {
    docs: Vec<Vec<String>>,
    df: HashMap<String, usize>,
    k1: f64,
    b: f64,
}

impl Oracle {
    fn ranking(&self, query: &[String]) -> Vec<(u64, f64)> {
        let n = self.docs.len() as f64;
        let avg = self.docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
        let distinct: BTreeSet<&String> = query.iter().collect();
        let mut out = Vec::new();
        for (id, doc) in self.docs.iter().enumerate() {
            let mut s = 0.0;
            for term in &distinct {
                let tf = doc.iter().filter(|t| t == term).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                let df = self.df[*term] as f64;
                let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                let len = doc.len() as f64;
                s += idf * tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * len / avg));
            }
            if s > 0.0 {
                out.push((id as u64, s));
            }
        }
        out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        out
    }
}

fn bm25_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst = 0.0f64;
    let mut queries = 0;
    for corpus_no in 0..100 {
        let vocab: Vec<String> = (0..rng.gen_range(1..=50)).map(|i| format!("w{i}")).collect();
        let n_docs = rng.gen_range(1..=500);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| (0..rng.gen_range(1..=120)).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect())
            .collect();
        let (k1, b) = if corpus_no % 2 == 0 { (1.2, 0.75) } else { (rng.gen_range(0.5..2.0), rng.gen_range(0.0..=1.0)) };
        let index = Index::build_from(
            docs.iter().enumerate().map(|(i, d)| (i as u64, d.join(" "))).collect::<Vec<_>>().iter().map(|(i, t)| (*i, t.as_str())),
            Params::new(k1, b).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let mut df = HashMap::new();
        for d in &docs {
            for t in d.iter().collect::<HashSet<_>>() {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let oracle = Oracle { docs, df, k1, b };
        for _ in 0..5 {
            let mut query: Vec<String> = (0..rng.gen_range(1..=6)).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
            if rng.gen_bool(0.3) {
                query.push("ausente".into());
            }
            let expected = oracle.ranking(&query);
            let got = index.retrieve(&query.join(" "), n_docs);
            let got_ids: Vec<u64> = got.iter().map(|h| h.passage_id).collect();
            let want_ids: Vec<u64> = expected.iter().map(|(id, _)| *id).collect();
            ensure!(got_ids == want_ids, "corpus {corpus_no}: ranking differs for query {query:?}");
            for (hit, (_, s)) in got.iter().zip(&expected) {
                worst = worst.max((hit.score - s).abs());
            }
            queries += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-9, "max score deviation {worst:e}");
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("100 corpora, {queries} queries, max deviation {worst:.1e}, {:.1}s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// Metric golden values.

fn metric_goldens() -> Outcome {
    let third = Exact::new(2, 3);
    ensure!(f1::<Exact>("rio amazonas", "amazonas") == third, "exact f1 is not 2/3");
    let f: f64 = f1("rio amazonas", "amazonas");
    ensure!((f - 2.0 / 3.0).abs() <= 1e-12, "f1 = {f}");
    let r: f64 = rouge_l_tokens(&["a", "b", "c"], &["a", "c"]);
    ensure!((r - 0.8).abs() <= 1e-12, "rouge_l = {r}");
    ensure!(rouge_l_tokens::<Exact, _>(&["a", "b", "c"], &["a", "c"]) == Exact::new(4, 5), "exact rouge_l is not 4/5");
    ensure!(exact_match::<f64>("2001", "2001.") == 1.0, "em(2001, 2001.) != 1");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words = ["rio", "Amazonas", "o", "a", "2001", "mata", "Atlântica", "os", "bioma", "de"];
    let decorate = |w: &str, rng: &mut ChaCha8Rng| match rng.gen_range(0..4) {
        0 => w.to_uppercase(),
        1 => format!("{w}."),
        2 => format!("{w},"),
        _ => w.to_string(),
    };
    let mut em_hits = 0;
    for i in 0..1000 {
        let base: Vec<&str> = (0..rng.gen_range(0..5)).map(|_| *words.choose(&mut rng).unwrap()).collect();
        let a: Vec<String> = base.iter().map(|w| decorate(w, &mut rng)).collect();
        let b: Vec<String> = if rng.gen_bool(0.5) {
            base.iter().map(|w| decorate(w, &mut rng)).collect()
        } else {
            (0..rng.gen_range(0..5)).map(|_| decorate(words.choose(&mut rng).unwrap(), &mut rng)).collect()
        };
        let (a, b) = (a.join(" "), b.join("  "));
        if exact_match::<Exact>(&a, &b) == Exact::from_integer(1) {
            em_hits += 1;
            ensure!(f1::<Exact>(&a, &b) == Exact::from_integer(1), "pair {i}: em=1 but f1<1 for {a:?} / {b:?}");
            ensure!(rouge_l::<Exact>(&a, &b) == Exact::from_integer(1), "pair {i}: em=1 but rouge_l<1 for {a:?} / {b:?}");
        }
    }
    ensure!(em_hits >= 100, "only {em_hits} exact-match pairs generated");
    Ok(format!("goldens hold; em=1 implies f1=rouge_l=1 on {em_hits} of 1000 random pairs"))
}

// ---------------------------------------------------------------------------
// Selection rule on constructed pairs.

fn rule_fixture() -> Outcome {
    let rules = KeywordRuleSet::new(
        &["brasil", "amazônia", "são paulo", "amazonas"],
        &["desmatamento", "biomas", "queimadas"],
        &["ibama", "cerrado"],
        &["futebol", "novela"],
    )
    .map_err(|e| e.to_string())?;
    use Reason::*;
    let cases = [
        ("Quando o Ibama foi criado?", "1989", SelectedByU),
        ("Qual time de futebol o Ibama patrocina?", "nenhum", SelectedByU),
        ("Quem venceu o campeonato de futebol no Brasil?", "Flamengo", RejectedExcluded),
        ("Qual é a capital do Brasil?", "Brasília", SelectedByM),
        ("Qual a taxa de desmatamento no Brasil?", "0,5%", SelectedByGWithM),
        ("Qual a taxa de desmatamento na Indonésia?", "1%", RejectedNoAnchor),
        ("Quem escreveu Dom Casmurro?", "Machado de Assis", RejectedNoAnchor),
        ("Onde fica a cidade de Manaus?", "no Amazonas", SelectedByM),
        ("Qual a novela mais vista no Brasil?", "Avenida", RejectedExcluded),
        ("O desmatamento afeta o futebol no Brasil?", "sim", RejectedExcluded),
        ("Quantos biomas existem em São Paulo?", "dois", SelectedByGWithM),
        ("QUAL O PIB DO BRASIL?", "alto", SelectedByM),
    ];
    let mut seen = HashSet::new();
    for (i, (q, a, want)) in cases.iter().enumerate() {
        let got = select_pair(&QAPair::new(*q, *a, Origin::Paq, Language::Pt), &rules).reason;
        ensure!(got == *want, "pair {i} ({q}): expected {want:?}, got {got:?}");
        seen.insert(got);
    }
    ensure!(seen.len() == Reason::ALL.len(), "fixture covers only {} reason classes", seen.len());
    Ok("12/12 agree, all five reason classes covered".into())
}

// ---------------------------------------------------------------------------
// Category traversal.

fn bfs_fixture() -> Outcome {
    let mut g = CategoryGraph::new();
    g.add_subcategory("Raiz", "A");
    g.add_subcategory("Raiz", "B");
    g.add_subcategory("A", "C");
    g.add_subcategory("B", "C");
    g.add_subcategory("C", "Raiz");
    g.add_article("Raiz", 1);
    for (cat, ids) in [("A", [2, 3]), ("B", [3, 4]), ("C", [5, 1])] {
        for id in ids {
            g.add_article(cat, id);
        }
    }
    let full = bfs_collect(&g, "Raiz", 100).map_err(|e| e.to_string())?;
    ensure!(full == vec![1, 2, 3, 4, 5], "full traversal gave {full:?}");
    for limit in 0..=7 {
        let got = bfs_collect(&g, "Raiz", limit).map_err(|e| e.to_string())?;
        ensure!(got.len() == limit.min(5), "limit {limit} returned {} articles", got.len());
        ensure!(got[..] == full[..got.len()], "limit {limit} is not a prefix of the full order");
    }
    for run in 0..10 {
        let got = bfs_collect(&g, "Raiz", 4).map_err(|e| e.to_string())?;
        ensure!(got == vec![1, 2, 3, 4], "run {run} gave {got:?}");
    }
    Ok("deduplicated [1, 2, 3, 4, 5], limits exact, 10 identical runs".into())
}

// ---------------------------------------------------------------------------
// Chunking.

fn chunk_fixture() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pieces = ["floresta", "rio", "Amazônia,", "2019.", "ação", "(Ibama)", "é", "--", "@@", "ÁGUA", "mata;", "x"];
    let spaces = [" ", "  ", "\t", "\n", " \r\n "];
    let mut corpus = Corpus::new(100);
    for _ in 0..200 {
        let n = rng.gen_range(1..400);
        let mut body = String::new();
        for _ in 0..n {
            body.push_str(pieces.choose(&mut rng).unwrap());
            body.push_str(spaces.choose(&mut rng).unwrap());
        }
        let raw = RawDocument { id: None, title: String::new(), body, published_at: None, url: None, source: None };
        corpus.ingest(raw, Source::Wiki);
    }
    ensure!(corpus.documents().len() >= 190, "too many documents cleaned to nothing");
    for doc in corpus.documents() {
        let parts: Vec<&str> =
            corpus.passages().iter().filter(|p| p.doc_id == doc.id).map(|p| p.text.as_str()).collect();
        ensure!(parts.join(" ") == doc.body, "document {} does not reconstruct", doc.id);
    }
    let words: Vec<String> = (0..250).map(|i| format!("p{i}")).collect();
    let c = corpus_of([RawDocument {
        id: None,
        title: String::new(),
        body: words.join(" "),
        published_at: None,
        url: None,
        source: None,
    }]);
    let sizes: Vec<u32> = c.passages().iter().map(|p| p.word_count).collect();
    ensure!(sizes == vec![100, 100, 50], "250 words chunked as {sizes:?}");
    Ok(format!("{} random documents reconstruct; 250 words -> [100, 100, 50]", corpus.documents().len()))
}

// ---------------------------------------------------------------------------
// End-to-end on the bundled mini corpus.

fn mini_kb() -> Result<(Kb, Vec<ragqa::corpus::Passage>), String> {
    let (_, passages) = mini_corpus().into_parts();
    let index = Index::build(&passages, Params::default()).map_err(|e| e.to_string())?;
    Ok((Kb::new(index, passages.clone()), passages))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let (kb, passages) = mini_kb()?;
    let qa = mini_qa();
    ensure!(qa.len() == 20, "fixture has {} QA pairs", qa.len());
    ensure!((55..=65).contains(&passages.len()), "fixture has {} passages", passages.len());

    let with_kb = ReaderConfig::extractive(Mode::RetrieverReader, 5);
    let bare = ReaderConfig::extractive(Mode::ReaderOnly, 5);
    let (mut f1_rag, mut f1_bare) = (0.0, 0.0);
    let (mut hits5, mut hits10) = (0, 0);
    for pair in &qa {
        let gold: Vec<u64> =
            passages.iter().filter(|p| contains_answer(&p.text, &pair.answer)).map(|p| p.passage_id).collect();
        ensure!(gold.len() == 1, "answer {:?} occurs in {} passages", pair.answer, gold.len());
        let top = |k| kb.index.retrieve(&pair.question, k).iter().any(|h| h.passage_id == gold[0]);
        let (r5, r10) = (top(5), top(10));
        ensure!(r10 || !r5, "recall@10 < recall@5 for {:?}", pair.question);
        hits5 += r5 as usize;
        hits10 += r10 as usize;

        let a = answer(&pair.question, &with_kb, Some(&kb)).map_err(|e| e.to_string())?;
        f1_rag += f1::<f64>(&a.answer, &pair.answer);
        let b = answer::<f64>(&pair.question, &bare, None).map_err(|e| e.to_string())?;
        f1_bare += f1::<f64>(&b.answer, &pair.answer);
    }
    let n = qa.len() as f64;
    let (f1_rag, f1_bare) = (f1_rag / n, f1_bare / n);
    let elapsed = start.elapsed();
    ensure!(f1_rag >= 0.60, "mean F1 {f1_rag:.3} < 0.60");
    ensure!(f1_rag > f1_bare, "mean F1 {f1_rag:.3} does not beat the no-retrieval baseline {f1_bare:.3}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "mean F1 {f1_rag:.3} vs baseline {f1_bare:.3}; recall@5 {hits5}/20, recall@10 {hits10}/20; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// The island question among distractors.

fn noronha_fixture() -> Outcome {
    let question = "Quando Fernando de Noronha se tornou um Patrimônio Mundial da UNESCO?";
    let target = raw_docs("mini/answers.jsonl")
        .into_iter()
        .find(|d| d.title == "Fernando de Noronha")
        .ok_or("Noronha document missing from fixture")?;
    let distractors: Vec<RawDocument> = raw_docs("mini/distractors.jsonl").into_iter().take(30).collect();
    ensure!(distractors.len() == 30, "only {} distractors", distractors.len());
    let corpus = corpus_of(std::iter::once(target).chain(distractors));
    let (_, passages) = corpus.into_parts();
    ensure!(passages.len() == 31, "expected 31 passages, got {}", passages.len());
    let index = Index::build(&passages, Params::default()).map_err(|e| e.to_string())?;
    let hits = index.retrieve(question, 5);
    ensure!(hits.first().map(|h| h.passage_id) == Some(passages[0].passage_id), "top-1 is {:?}", hits.first());

    let texts: Vec<&str> =
        hits.iter().map(|h| passages.iter().find(|p| p.passage_id == h.passage_id).unwrap().text.as_str()).collect();
    let rq = reformulate(question, &texts, 512).map_err(|e| e.to_string())?;
    let ex = extractive_answer(&rq, DEFAULT_MAX_SPAN);
    ensure!(ex.text.contains("2001"), "extractive answer {:?} lacks 2001", ex.text);
    Ok(format!("top-1 is the island passage; answer {:?}", ex.text))
}

// ---------------------------------------------------------------------------
// Dataset split.

fn split_fixture() -> Outcome {
    let pairs: Vec<QAPair> =
        (0..100).map(|i| QAPair::new(format!("pergunta {i}?"), format!("{i}"), Origin::Paq, Language::Pt)).collect();
    let run = |seed| split_dataset(pairs.clone(), SplitRatios::default(), seed).map_err(|e| e.to_string());
    let s = run(42)?;
    let sizes = (s.train.len(), s.validation.len(), s.test.len());
    ensure!(sizes == (70, 15, 15), "sizes {sizes:?}");
    let all: Vec<&String> = s.train.iter().chain(&s.validation).chain(&s.test).map(|p| &p.question).collect();
    let unique: HashSet<&String> = all.iter().copied().collect();
    let original: HashSet<&String> = pairs.iter().map(|p| &p.question).collect();
    ensure!(unique.len() == 100 && unique == original, "splits are not a disjoint cover of the input");
    ensure!(run(42)? == s, "same seed gave a different split");
    ensure!(run(43)? != s, "different seeds gave the same split");
    Ok("70/15/15, disjoint cover, seed-deterministic".into())
}

// ---------------------------------------------------------------------------
// Index persistence.

fn persistence() -> Outcome {
    let (kb, _) = mini_kb()?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("mini.idx");
    save_index(&kb.index, &path).map_err(|e| e.to_string())?;
    let back: Index = load_index(&path).map_err(|e| e.to_string())?;
    ensure!(back == kb.index, "loaded index differs from the saved one");

    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.idx");
    let mut rejected = 0;
    for pos in [bytes.len() / 3, bytes.len() / 2, bytes.len() - 2] {
        let mut b = bytes.clone();
        b[pos] ^= 0x5a;
        std::fs::write(&bad, &b).map_err(|e| e.to_string())?;
        ensure!(load_index::<f64>(&bad).is_err(), "flipped byte at {pos} was accepted");
        rejected += 1;
    }
    std::fs::write(&bad, &bytes[..bytes.len() / 2]).map_err(|e| e.to_string())?;
    ensure!(load_index::<f64>(&bad).is_err(), "truncated file was accepted");
    let mut b = bytes.clone();
    b[4..8].copy_from_slice(&(FORMAT_VERSION + 1).to_le_bytes());
    std::fs::write(&bad, &b).map_err(|e| e.to_string())?;
    let err = load_index::<f64>(&bad).err().ok_or("future version was accepted")?.to_string();
    ensure!(err.contains("version"), "version error does not say so: {err}");
    Ok(format!("round trip equal; {} corrupted variants rejected", rejected + 2))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("bm25_oracle_equivalence", bm25_oracle),
        ("metric_golden_values", metric_goldens),
        ("selection_rule_fixture", rule_fixture),
        ("category_bfs", bfs_fixture),
        ("chunking_reconstruction", chunk_fixture),
        ("end_to_end_mini_corpus", end_to_end),
        ("island_question_among_distractors", noronha_fixture),
        ("dataset_split", split_fixture),
        ("index_persistence", persistence),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
