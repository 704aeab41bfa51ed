//! Minimal JSON-over-HTTP machine translation client.
//!
//! Wire contract: POST {base}/translate with body
//! {"source": str, "srcLang": str, "tgtLang": str, "nBest": int} and a
//! {"hypotheses": [{"text": str, "score": number}, ...]} response.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{NBestRequest, ProviderError, TranslationHypothesis, Translator};

#[derive(Serialize)]
struct WireRequest<'a> {
    source: &'a str,
    #[serde(rename = "srcLang")]
    src_lang: &'a str,
    #[serde(rename = "tgtLang")]
    tgt_lang: &'a str,
    #[serde(rename = "nBest")]
    n_best: usize,
}

#[derive(Deserialize)]
struct WireResponse {
    hypotheses: Vec<TranslationHypothesis>,
}

pub struct RemoteMtProvider {
    base_url: String,
    agent: ureq::Agent,
}

impl RemoteMtProvider {
    pub fn new(base_url: impl Into<String>, timeout: Duration) -> RemoteMtProvider {
        let base_url = base_url.into().trim_end_matches('/').to_string();
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        RemoteMtProvider { base_url, agent }
    }
}

impl Translator for RemoteMtProvider {
    fn id(&self) -> String {
        format!("remote-mt:{}", self.base_url)
    }

    fn translate_nbest(
        &self,
        request: &NBestRequest,
    ) -> Result<Vec<TranslationHypothesis>, ProviderError> {
        let body = WireRequest {
            source: &request.source_text,
            src_lang: &request.source_lang,
            tgt_lang: &request.target_lang,
            n_best: request.n,
        };
        let url = format!("{}/translate", self.base_url);
        let response = self
            .agent
            .post(&url)
            .send_json(serde_json::to_value(&body).expect("request serializes"))
            .map_err(|e| match e {
                ureq::Error::Status(code, _) => {
                    ProviderError::Unavailable(format!("{url} returned {code}"))
                }
                ureq::Error::Transport(t) if t.kind() == ureq::ErrorKind::Io => {
                    ProviderError::Timeout(format!("{url}: {t}"))
                }
                ureq::Error::Transport(t) => ProviderError::Unavailable(format!("{url}: {t}")),
            })?;
        let parsed: WireResponse = response
            .into_json()
            .map_err(|e| ProviderError::Unavailable(format!("{url}: bad response: {e}")))?;
        let mut hypotheses = parsed.hypotheses;
        hypotheses.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal));
        hypotheses.truncate(request.n);
        Ok(hypotheses)
    }
}
