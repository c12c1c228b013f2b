//! Category graph built from the Wikimedia `categorylinks` SQL dump, and the
//! breadth-first article collection over it.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub subcategories: Vec<String>,
    pub articles: Vec<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoryGraph {
    nodes: BTreeMap<String, CategoryNode>,
}

/// Dump titles use underscores; users tend to type spaces and sometimes the
/// namespace prefix.
pub fn normalize_title(title: &str) -> String {
    let t = title.trim();
    let t = t
        .strip_prefix("Categoria:")
        .or_else(|| t.strip_prefix("Category:"))
        .unwrap_or(t);
    t.trim().replace(' ', "_")
}

impl CategoryGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, category: &str) -> Option<&CategoryNode> {
        self.nodes.get(&normalize_title(category))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&str, &CategoryNode)> {
        self.nodes.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn add_article(&mut self, category: &str, article: u64) {
        let node = self.nodes.entry(normalize_title(category)).or_default();
        if !node.articles.contains(&article) {
            node.articles.push(article);
        }
    }

    pub fn add_subcategory(&mut self, category: &str, sub: &str) {
        let sub = normalize_title(sub);
        let node = self.nodes.entry(normalize_title(category)).or_default();
        if !node.subcategories.contains(&sub) {
            node.subcategories.push(sub);
        }
    }

    /// Removes repeated entries, keeping first occurrences. The bulk parser
    /// appends without checking and calls this once at the end.
    fn dedup(&mut self) {
        for node in self.nodes.values_mut() {
            let mut seen = HashSet::new();
            node.articles.retain(|a| seen.insert(*a));
            let mut seen = HashSet::new();
            node.subcategories.retain(|s| seen.insert(s.clone()));
        }
    }
}

/// Counts from one `categorylinks` parse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkParseReport {
    pub pages: u64,
    pub subcats: u64,
    /// Tuples of other types (`file`).
    pub ignored: u64,
    pub malformed: u64,
    /// Subcategory tuples whose page id is missing from the id map.
    pub unresolved: u64,
}

impl LinkParseReport {
    pub fn parsed(&self) -> u64 {
        self.pages + self.subcats + self.ignored
    }
}

#[derive(Debug, PartialEq)]
enum Value {
    Str(String),
    Bare(String),
}

impl Value {
    fn text(&self) -> &str {
        match self {
            Value::Str(s) | Value::Bare(s) => s,
        }
    }
}

/// Cursor over one SQL statement line.
struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str) -> Self {
        Lexer { chars: s.chars().peekable() }
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|c| c.is_whitespace()).is_some() {}
    }

    fn quoted(&mut self, quote: char) -> Option<String> {
        let mut out = String::new();
        loop {
            match self.chars.next()? {
                '\\' => out.push(match self.chars.next()? {
                    '0' => '\0',
                    'n' => '\n',
                    'r' => '\r',
                    't' => '\t',
                    'b' => '\u{8}',
                    'Z' => '\u{1a}',
                    other => other,
                }),
                c if c == quote => {
                    if self.chars.next_if_eq(&quote).is_some() {
                        out.push(quote);
                    } else {
                        return Some(out);
                    }
                }
                c => out.push(c),
            }
        }
    }

    fn value(&mut self) -> Option<Value> {
        self.skip_ws();
        match *self.chars.peek()? {
            q @ ('\'' | '"') => {
                self.chars.next();
                self.quoted(q).map(Value::Str)
            }
            _ => {
                let mut out = String::new();
                while let Some(c) = self.chars.next_if(|c| *c != ',' && *c != ')') {
                    out.push(c);
                }
                Some(Value::Bare(out.trim().to_string()))
            }
        }
    }

    /// Parses `( v, v, ... )`. `None` means the line is broken past repair.
    fn tuple(&mut self) -> Option<Vec<Value>> {
        self.skip_ws();
        self.chars.next_if_eq(&'(')?;
        let mut values = Vec::new();
        loop {
            values.push(self.value()?);
            self.skip_ws();
            match self.chars.next()? {
                ',' => continue,
                ')' => return Some(values),
                _ => return None,
            }
        }
    }
}

/// Byte offset just past the `VALUES` keyword of an `INSERT` statement.
fn values_start(line: &str) -> Option<usize> {
    let head = line.trim_start();
    if !head.get(..6)?.eq_ignore_ascii_case("insert") {
        return None;
    }
    let upper = line.to_ascii_uppercase();
    upper.find("VALUES").map(|i| i + "VALUES".len())
}

/// Parses `categorylinks` INSERT statements into a [`CategoryGraph`].
///
/// Accepts both the minimal `(from, to, type)` tuple and the full dump row
/// `(cl_from, cl_to, cl_sortkey, cl_timestamp, cl_sortkey_prefix,
/// cl_collation, cl_type)`; the type is always the last field. `id_titles`
/// resolves the page ids of subcategory members to their category titles.
/// Lines that are not INSERT statements are ignored.
pub fn parse_categorylinks<R: BufRead>(
    reader: R,
    id_titles: &HashMap<u64, String>,
) -> Result<(CategoryGraph, LinkParseReport)> {
    let mut graph = CategoryGraph::new();
    let mut report = LinkParseReport::default();

    for line in reader.lines() {
        let line = line.map_err(|e| Error::Ingest(format!("unreadable dump stream: {e}")))?;
        let Some(start) = values_start(&line) else { continue };
        let mut lex = Lexer::new(&line[start..]);
        loop {
            let Some(fields) = lex.tuple() else {
                report.malformed += 1;
                break;
            };
            apply_tuple(&fields, id_titles, &mut graph, &mut report);
            lex.skip_ws();
            match lex.chars.next() {
                Some(',') => continue,
                Some(';') | None => break,
                Some(_) => {
                    report.malformed += 1;
                    break;
                }
            }
        }
    }

    if report.parsed() == 0 {
        log::warn!("categorylinks: no tuples parsed ({} malformed)", report.malformed);
        return Err(Error::EmptyGraph);
    }
    if report.malformed + report.unresolved > 0 {
        log::warn!(
            "categorylinks: skipped {} malformed and {} unresolved tuples",
            report.malformed,
            report.unresolved
        );
    }
    graph.dedup();
    Ok((graph, report))
}

fn apply_tuple(
    fields: &[Value],
    id_titles: &HashMap<u64, String>,
    graph: &mut CategoryGraph,
    report: &mut LinkParseReport,
) {
    if fields.len() < 3 {
        report.malformed += 1;
        return;
    }
    let Ok(from) = fields[0].text().trim().parse::<u64>() else {
        report.malformed += 1;
        return;
    };
    let target = normalize_title(fields[1].text());
    if target.is_empty() {
        report.malformed += 1;
        return;
    }
    match fields[fields.len() - 1].text() {
        "page" => {
            graph.nodes.entry(target).or_default().articles.push(from);
            report.pages += 1;
        }
        "subcat" => match id_titles.get(&from) {
            Some(title) => {
                let sub = normalize_title(title);
                graph.nodes.entry(target).or_default().subcategories.push(sub);
                report.subcats += 1;
            }
            None => report.unresolved += 1,
        },
        "file" => report.ignored += 1,
        _ => report.malformed += 1,
    }
}

/// Reads the `page_id<TAB>title` companion map for category pages.
pub fn parse_id_map<R: BufRead>(reader: R) -> Result<HashMap<u64, String>> {
    let mut map = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, title) = line
            .split_once('\t')
            .ok_or_else(|| Error::Ingest(format!("id map line {}: expected id<TAB>title", lineno + 1)))?;
        let id = id
            .trim()
            .parse()
            .map_err(|_| Error::Ingest(format!("id map line {}: bad page id `{id}`", lineno + 1)))?;
        map.insert(id, normalize_title(title));
    }
    Ok(map)
}

#[derive(Serialize, Deserialize)]
struct GraphLine {
    category: String,
    #[serde(default)]
    subcategories: Vec<String>,
    #[serde(default)]
    articles: Vec<u64>,
}

pub fn read_graph_jsonl<R: BufRead>(reader: R) -> Result<CategoryGraph> {
    let lines: Vec<GraphLine> = crate::jsonl::read(reader)?;
    if lines.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut graph = CategoryGraph::new();
    for line in lines {
        let node = graph.nodes.entry(normalize_title(&line.category)).or_default();
        node.articles.extend(line.articles);
        node.subcategories.extend(line.subcategories.iter().map(|s| normalize_title(s)));
    }
    graph.dedup();
    Ok(graph)
}

pub fn write_graph_jsonl<W: Write>(graph: &CategoryGraph, writer: W) -> Result<()> {
    let lines: Vec<GraphLine> = graph
        .nodes
        .iter()
        .map(|(k, v)| GraphLine {
            category: k.clone(),
            subcategories: v.subcategories.clone(),
            articles: v.articles.clone(),
        })
        .collect();
    crate::jsonl::write(writer, &lines)
}

/// Collects article ids breadth-first from `root`.
///
/// Categories are visited in level order; each category contributes its own
/// articles (in listed order, skipping ids already collected) before its
/// subcategories are queued. Collection stops as soon as `limit` articles
/// are held. Categories already visited are skipped, so cycles terminate.
/// Subcategories with no node of their own count as empty.
pub fn bfs_collect(graph: &CategoryGraph, root: &str, limit: usize) -> Result<Vec<u64>> {
    let root = normalize_title(root);
    if !graph.nodes.contains_key(&root) {
        return Err(Error::UnknownCategory(root));
    }
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    let mut seen_articles = HashSet::new();
    let mut visited: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    visited.insert(&root);
    queue.push_back(&root);

    while let Some(category) = queue.pop_front() {
        let Some(node) = graph.nodes.get(category) else { continue };
        for &article in &node.articles {
            if seen_articles.insert(article) {
                out.push(article);
                if out.len() == limit {
                    return Ok(out);
                }
            }
        }
        for sub in &node.subcategories {
            if visited.insert(sub) {
                queue.push_back(sub);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(dump: &str, ids: &[(u64, &str)]) -> Result<(CategoryGraph, LinkParseReport)> {
        let map = ids.iter().map(|(i, t)| (*i, t.to_string())).collect();
        parse_categorylinks(Cursor::new(dump), &map)
    }

    #[test]
    fn single_page_tuple() {
        let (g, r) = parse(
            "INSERT INTO `categorylinks` VALUES (\"12\", 'Meio_ambiente_do_Brasil', 'page');\n",
            &[],
        )
        .unwrap();
        let mut expected = CategoryGraph::new();
        expected.add_article("Meio_ambiente_do_Brasil", 12);
        assert_eq!(g, expected);
        assert_eq!(g.len(), 1);
        let node = g.get("Meio ambiente do Brasil").unwrap();
        assert_eq!(node.articles, vec![12]);
        assert!(node.subcategories.is_empty());
        assert_eq!(r.pages, 1);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(parse("", &[]), Err(Error::EmptyGraph)));
        assert!(matches!(parse("-- comment only\nCREATE TABLE x;\n", &[]), Err(Error::EmptyGraph)));
    }

    #[test]
    fn escaped_quotes_in_names() {
        let dump = r"INSERT INTO `categorylinks` VALUES (1,'Rios_d\'Oeste','page'),(2,'Ilhas_d''Água','page');";
        let (g, _) = parse(dump, &[]).unwrap();
        assert_eq!(g.get("Rios_d'Oeste").unwrap().articles, vec![1]);
        assert_eq!(g.get("Ilhas_d'Água").unwrap().articles, vec![2]);
    }

    #[test]
    fn full_dump_rows_and_subcats() {
        let dump = "INSERT INTO `categorylinks` VALUES \
            (10,'Meio_ambiente_do_Brasil','BIOMAS','2021-01-01 00:00:00','','uppercase','subcat'),\
            (11,'Biomas_do_Brasil','CERRADO','2021-01-01 00:00:00','','uppercase','page'),\
            (12,'Meio_ambiente_do_Brasil','X.PNG','2021-01-01 00:00:00','','uppercase','file'),\
            (99,'Meio_ambiente_do_Brasil','ZZ','2021-01-01 00:00:00','','uppercase','subcat');";
        let (g, r) = parse(dump, &[(10, "Biomas do Brasil")]).unwrap();
        assert_eq!(g.get("Meio_ambiente_do_Brasil").unwrap().subcategories, vec!["Biomas_do_Brasil"]);
        assert_eq!(g.get("Biomas_do_Brasil").unwrap().articles, vec![11]);
        assert_eq!((r.pages, r.subcats, r.ignored, r.unresolved, r.malformed), (1, 1, 1, 1, 0));
    }

    #[test]
    fn malformed_tuples_are_counted_and_skipped() {
        let dump = "INSERT INTO `categorylinks` VALUES (abc,'A','page'),(1,'A'),(2,'A','weird'),(3,'A','page');\n\
                    INSERT INTO `categorylinks` VALUES (4,'A','page'),(5,'A,'page";
        let (g, r) = parse(dump, &[]).unwrap();
        assert_eq!(g.get("A").unwrap().articles, vec![3, 4]);
        assert_eq!(r.malformed, 4);
    }

    #[test]
    fn duplicate_rows_are_collapsed() {
        let dump = "INSERT INTO categorylinks VALUES (1,'A','page'),(1,'A','page'),(2,'A','page');";
        let (g, _) = parse(dump, &[]).unwrap();
        assert_eq!(g.get("A").unwrap().articles, vec![1, 2]);
    }

    #[test]
    fn id_map_and_graph_jsonl() {
        let ids = parse_id_map(Cursor::new("10\tBiomas do Brasil\n\n11\tCerrado\n")).unwrap();
        assert_eq!(ids[&10], "Biomas_do_Brasil");
        assert!(parse_id_map(Cursor::new("x\ty\n")).is_err());

        let mut g = CategoryGraph::new();
        g.add_subcategory("A", "B");
        g.add_article("B", 5);
        let mut buf = Vec::new();
        write_graph_jsonl(&g, &mut buf).unwrap();
        assert_eq!(read_graph_jsonl(Cursor::new(buf)).unwrap(), g);
    }

    #[test]
    fn bfs_exhausts_before_limit() {
        let mut g = CategoryGraph::new();
        for a in [3, 1, 2] {
            g.add_article("root", a);
        }
        assert_eq!(bfs_collect(&g, "root", 10).unwrap(), vec![3, 1, 2]);
    }

    #[test]
    fn bfs_diamond_counts_shared_article_once() {
        let mut g = CategoryGraph::new();
        g.add_subcategory("root", "A");
        g.add_subcategory("root", "B");
        g.add_subcategory("A", "C");
        g.add_subcategory("B", "C");
        g.add_article("root", 1);
        g.add_article("A", 2);
        g.add_article("B", 3);
        g.add_article("C", 4);
        // root, then A and B, then C reached once through A
        assert_eq!(bfs_collect(&g, "root", 10).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn bfs_stops_at_limit() {
        let mut g = CategoryGraph::new();
        for a in 1..=5 {
            g.add_article("root", a);
        }
        assert_eq!(bfs_collect(&g, "root", 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn bfs_unknown_root() {
        let g = CategoryGraph::new();
        assert!(matches!(bfs_collect(&g, "nada", 1), Err(Error::UnknownCategory(_))));
    }

    #[test]
    fn bfs_survives_cycles() {
        let mut g = CategoryGraph::new();
        g.add_subcategory("A", "B");
        g.add_subcategory("B", "A");
        g.add_subcategory("B", "B");
        g.add_article("B", 9);
        assert_eq!(bfs_collect(&g, "A", 5).unwrap(), vec![9]);
    }
}
