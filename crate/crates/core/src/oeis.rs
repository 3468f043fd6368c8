//! Cross-checks against OEIS b-files.
//!
//! Lookup order for a b-file is network, then the on-disk cache, then a short
//! prefix compiled into the crate. The embedded prefixes are the first ten
//! totals produced by [`count_flattened_recurrence`] itself, so the offline
//! path never depends on third-party data.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::counting::FlattenedCounter;
use crate::{Error, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const ALIGNMENT_FILE: &str = "alignment.txt";
/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "FLATSTIR_CACHE_DIR";

/// An OEIS A-number: `A` followed by exactly six digits.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SequenceId(String);

impl SequenceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn digits(&self) -> &str {
        &self.0[1..]
    }

    /// File name OEIS uses for the b-file, e.g. `b007405.txt`.
    pub fn bfile_name(&self) -> String {
        format!("b{}.txt", self.digits())
    }

    pub fn bfile_url(&self) -> String {
        format!("https://oeis.org/{}/{}", self.0, self.bfile_name())
    }
}

impl FromStr for SequenceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ok = s.len() == 7 && s.starts_with('A') && s[1..].bytes().all(|b| b.is_ascii_digit());
        if ok {
            Ok(SequenceId(s.to_string()))
        } else {
            Err(Error::malformed(format!(
                "{s:?} is not an OEIS id (expected A followed by 6 digits)"
            )))
        }
    }
}

impl fmt::Display for SequenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for SequenceId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// The sequence listing `|flt(Q_n^k)|` for each multiplicity with a known entry.
pub fn sequence_for_multiplicity(k: usize) -> Result<SequenceId> {
    let id = match k {
        2 => "A007405",
        3 => "A355164",
        4 => "A355167",
        _ => {
            return Err(Error::domain(format!(
                "no OEIS sequence is associated with k={k} (supported: 2, 3, 4)"
            )))
        }
    };
    id.parse()
}

/// One `index value` row of a b-file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub index: i64,
    pub value: BigInt,
}

/// Parses b-file text. Blank lines and lines starting with `#` are skipped.
pub fn parse_bfile(text: &str) -> Result<Vec<Term>> {
    let mut terms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse { line: i + 1, message };
        let mut fields = line.split_whitespace();
        let (Some(index), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(bad(format!("expected \"index value\", found {line:?}")));
        };
        let index = index.parse::<i64>().map_err(|_| bad(format!("bad index {index:?}")))?;
        let value = value
            .parse::<BigInt>()
            .map_err(|_| bad(format!("bad value {value:?}")))?;
        if let Some(prev) = terms.last().map(|t: &Term| t.index) {
            if index != prev + 1 {
                return Err(bad(format!("index {index} does not follow {prev}")));
            }
        }
        terms.push(Term { index, value });
    }
    Ok(terms)
}

const EMBEDDED_A007405: &str = "0 1\n1 2\n2 6\n3 24\n4 116\n5 648\n6 4088\n7 28640\n8 219920\n9 1832224\n";
const EMBEDDED_A355164: &str = "0 1\n1 3\n2 12\n3 63\n4 405\n5 3024\n6 25515\n7 239355\n8 2465478\n9 27600669\n";
const EMBEDDED_A355167: &str = "0 1\n1 4\n2 20\n3 128\n4 1008\n5 9280\n6 96704\n7 1120768\n8 14274816\n9 197833728\n";

/// Compiled-in prefix for the three supported sequences, indexed from 0.
pub fn embedded_bfile(id: &SequenceId) -> Option<&'static str> {
    match id.as_str() {
        "A007405" => Some(EMBEDDED_A007405),
        "A355164" => Some(EMBEDDED_A355164),
        "A355167" => Some(EMBEDDED_A355167),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Network,
    Cache,
    Embedded,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Network => "network",
            Source::Cache => "cache",
            Source::Embedded => "embedded",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Fetched {
    pub id: SequenceId,
    pub source: Source,
    pub terms: Vec<Term>,
    /// Why earlier sources in the lookup order were skipped.
    pub fallbacks: Vec<String>,
}

/// `$FLATSTIR_CACHE_DIR`, else `<user data dir>/flatstir/oeis`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    dirs::data_dir()
        .unwrap_or_else(std::env::temp_dir)
        .join("flatstir")
        .join("oeis")
}

#[derive(Clone, Debug)]
pub struct ClientConfig {
    pub cache_dir: PathBuf,
    /// Skip the network entirely.
    pub offline: bool,
    pub timeout: Duration,
    /// Additional attempts after the first failed request.
    pub retries: u32,
    /// Overrides `https://oeis.org` (used by tests).
    pub base_url: Option<String>,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            cache_dir: default_cache_dir(),
            offline: false,
            timeout: DEFAULT_TIMEOUT,
            retries: 1,
            base_url: None,
        }
    }
}

pub struct Client {
    config: ClientConfig,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(config: ClientConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Client { config, agent }
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    pub fn cache_path(&self, id: &SequenceId) -> PathBuf {
        self.config.cache_dir.join(id.bfile_name())
    }

    fn url(&self, id: &SequenceId) -> String {
        match &self.config.base_url {
            Some(base) => format!("{}/{}/{}", base.trim_end_matches('/'), id, id.bfile_name()),
            None => id.bfile_url(),
        }
    }

    fn download(&self, id: &SequenceId) -> Result<String> {
        let url = self.url(id);
        let mut last = String::new();
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                thread::sleep(Duration::from_millis(500));
            }
            match self.agent.get(&url).call() {
                Ok(mut resp) => match resp.body_mut().read_to_string() {
                    Ok(body) => return Ok(body),
                    Err(e) => last = e.to_string(),
                },
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::Network(format!("GET {url}: {last}")))
    }

    /// Network, then cache, then embedded prefix. A successful download is
    /// validated before it replaces the cached copy.
    pub fn fetch_bfile(&self, id: &SequenceId) -> Result<Fetched> {
        let mut fallbacks = Vec::new();
        if self.config.offline {
            fallbacks.push("network: offline mode".to_string());
        } else {
            match self.download(id) {
                Ok(body) => {
                    let terms = parse_bfile(&body)?;
                    if let Err(e) = write_atomic(&self.cache_path(id), body.as_bytes()) {
                        fallbacks.push(format!("cache write: {e}"));
                    }
                    return Ok(Fetched {
                        id: id.clone(),
                        source: Source::Network,
                        terms,
                        fallbacks,
                    });
                }
                Err(e) => fallbacks.push(format!("network: {e}")),
            }
        }

        let path = self.cache_path(id);
        match fs::read_to_string(&path) {
            Ok(body) => {
                return Ok(Fetched {
                    id: id.clone(),
                    source: Source::Cache,
                    terms: parse_bfile(&body)?,
                    fallbacks,
                })
            }
            Err(e) => fallbacks.push(format!("cache {}: {e}", path.display())),
        }

        match embedded_bfile(id) {
            Some(body) => Ok(Fetched {
                id: id.clone(),
                source: Source::Embedded,
                terms: parse_bfile(body)?,
                fallbacks,
            }),
            None => Err(Error::Unavailable(id.to_string())),
        }
    }

    pub fn alignments(&self) -> AlignmentStore {
        AlignmentStore::new(self.config.cache_dir.join(ALIGNMENT_FILE))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Pinned offsets, one `A-number=index` line per sequence. The pinned index
/// is the OEIS index holding `|flt(Q_1^k)|`.
#[derive(Clone, Debug)]
pub struct AlignmentStore {
    path: PathBuf,
}

impl AlignmentStore {
    pub fn new(path: PathBuf) -> Self {
        AlignmentStore { path }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn load(&self) -> Result<BTreeMap<String, i64>> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(e) => return Err(Error::io(&self.path, e)),
        };
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::Parse {
                line: i + 1,
                message: format!("expected \"A000000=offset\", found {line:?}"),
            };
            let (key, value) = line.split_once('=').ok_or_else(bad)?;
            let id: SequenceId = key.trim().parse().map_err(|_| bad())?;
            let offset = value.trim().parse().map_err(|_| bad())?;
            map.insert(id.0, offset);
        }
        Ok(map)
    }

    pub fn get(&self, id: &SequenceId) -> Result<Option<i64>> {
        Ok(self.load()?.get(id.as_str()).copied())
    }

    pub fn pin(&self, id: &SequenceId, offset: i64) -> Result<()> {
        let mut map = self.load()?;
        map.insert(id.to_string(), offset);
        let mut text = String::from("# OEIS index of the first term, determined from data\n");
        for (k, v) in &map {
            text.push_str(&format!("{k}={v}\n"));
        }
        write_atomic(&self.path, text.as_bytes())
    }
}

/// OEIS index at which `computed[0..3]` occurs as three consecutive terms.
pub fn align(computed: &[BigUint], terms: &[Term]) -> Result<i64> {
    const WINDOW: usize = 3;
    if computed.len() < WINDOW {
        return Err(Error::Alignment(format!(
            "need {WINDOW} computed terms, have {}",
            computed.len()
        )));
    }
    let head: Vec<BigInt> = computed[..WINDOW].iter().map(|c| BigInt::from(c.clone())).collect();
    terms
        .windows(WINDOW)
        .find(|w| w.iter().zip(&head).all(|(t, c)| &t.value == c))
        .map(|w| w[0].index)
        .ok_or_else(|| {
            let shown: Vec<String> = head.iter().map(|c| c.to_string()).collect();
            Error::Alignment(format!(
                "terms {} do not occur consecutively in the b-file",
                shown.join(", ")
            ))
        })
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckRow {
    /// Order `n + 1` of the counted words.
    pub n: usize,
    pub oeis_index: i64,
    #[serde(with = "crate::bigser")]
    pub computed: BigUint,
    #[serde(serialize_with = "serialize_opt_bigint")]
    pub expected: Option<BigInt>,
    pub matched: bool,
}

fn serialize_opt_bigint<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub k: usize,
    pub sequence: SequenceId,
    pub source: Source,
    pub offset: i64,
    pub fallbacks: Vec<String>,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    /// Rows for which the b-file has a term.
    pub fn compared(&self) -> usize {
        self.rows.iter().filter(|r| r.expected.is_some()).count()
    }

    pub fn matched(&self) -> usize {
        self.rows.iter().filter(|r| r.matched).count()
    }

    /// Every compared row matched and at least one row was compared.
    pub fn all_match(&self) -> bool {
        self.compared() > 0 && self.matched() == self.compared()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} k={} source={} offset={} matched={}/{}\n",
            self.sequence,
            self.k,
            self.source,
            self.offset,
            self.matched(),
            self.compared()
        );
        for r in &self.rows {
            let expected = r.expected.as_ref().map_or("-".to_string(), |e| e.to_string());
            let flag = match (&r.expected, r.matched) {
                (None, _) => "missing",
                (_, true) => "ok",
                (_, false) => "MISMATCH",
            };
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.oeis_index, r.computed, expected, flag));
        }
        out
    }
}

/// Compares `|flt(Q_{n+1}^k)|` for `n = 0..=max_n` with the OEIS entry for `k`.
///
/// The offset is found from data on first contact with real (network or
/// cached) data and pinned; later runs must agree with the pin. Embedded
/// prefixes are always aligned afresh and never pinned.
pub fn cross_check(client: &Client, k: usize, max_n: usize) -> Result<CrossCheckReport> {
    let id = sequence_for_multiplicity(k)?;
    let mut counter = FlattenedCounter::new(k);
    let computed = (0..=max_n.max(2))
        .map(|n| counter.count(n + 1))
        .collect::<Result<Vec<_>>>()?;

    let fetched = client.fetch_bfile(&id)?;
    let found = align(&computed, &fetched.terms)?;
    let offset = if fetched.source == Source::Embedded {
        found
    } else {
        let store = client.alignments();
        match store.get(&id)? {
            Some(pinned) if pinned != found => {
                return Err(Error::Alignment(format!(
                    "{id}: pinned offset {pinned} in {} but data aligns at {found}",
                    store.path().display()
                )))
            }
            Some(pinned) => pinned,
            None => {
                store.pin(&id, found)?;
                found
            }
        }
    };

    let by_index: BTreeMap<i64, &BigInt> = fetched.terms.iter().map(|t| (t.index, &t.value)).collect();
    let rows = computed
        .into_iter()
        .take(max_n + 1)
        .enumerate()
        .map(|(n, computed)| {
            let oeis_index = offset + n as i64;
            let expected = by_index.get(&oeis_index).map(|v| (*v).clone());
            let matched = expected.as_ref() == Some(&BigInt::from(computed.clone()));
            CrossCheckRow {
                n,
                oeis_index,
                computed,
                expected,
                matched,
            }
        })
        .collect();

    Ok(CrossCheckReport {
        k,
        sequence: id,
        source: fetched.source,
        offset,
        fallbacks: fetched.fallbacks,
        rows,
    })
}
