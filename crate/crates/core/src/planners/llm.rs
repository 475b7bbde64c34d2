//! Client for external LLM planning endpoints.
//!
//! Wire protocol: HTTP POST of `{"prompt", "max_tokens", "temperature",
//! "top_p"}`, answered by `{"text"}`. Any non-200 status, connection
//! failure, or malformed wire body counts as a transport failure and is
//! retried; response *text* that fails to parse is a hard planner failure.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{DecodeParams, PlanError, PlanErrorKind, PlanResult, Planner};
use crate::chain::parse_response_with;
use crate::prompt::{build_prompt, InstructionConfig};
use crate::scenario::FeatureConfig;
use crate::world::ScenarioState;

/// Request body sent to the endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub top_p: f64,
}

/// Response body expected from the endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireResponse {
    pub text: String,
}

/// Plans by sending the assembled prompt to an HTTP endpoint and parsing
/// the returned text as a chain + trajectory response.
pub struct LlmPlanner {
    endpoint: String,
    instructions: InstructionConfig,
    features: FeatureConfig,
    decode: DecodeParams,
    max_tokens: u32,
    retries: u32,
    backoff: Duration,
    client: reqwest::blocking::Client,
}

impl LlmPlanner {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            instructions: InstructionConfig::default(),
            features: FeatureConfig::default(),
            decode: DecodeParams::default(),
            max_tokens: 2048,
            retries: 2,
            backoff: Duration::from_secs(1),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("http client construction cannot fail with static options"),
        }
    }

    pub fn with_instructions(mut self, instructions: InstructionConfig) -> Self {
        self.instructions = instructions;
        self
    }

    pub fn with_features(mut self, features: FeatureConfig) -> Self {
        self.features = features;
        self
    }

    pub fn with_decode(mut self, decode: DecodeParams) -> Self {
        self.decode = decode;
        self
    }

    /// Retry count on transport failure and the pause between attempts.
    pub fn with_retry_policy(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    fn request_text(&self, prompt: String) -> Result<String, PlanErrorKind> {
        let request = WireRequest {
            prompt,
            max_tokens: self.max_tokens,
            temperature: self.decode.temperature,
            top_p: self.decode.top_p,
        };
        let attempts = self.retries + 1;
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                std::thread::sleep(self.backoff);
            }
            match self.client.post(&self.endpoint).json(&request).send() {
                Ok(response) => {
                    let status = response.status();
                    if status != reqwest::StatusCode::OK {
                        last = format!("endpoint returned status {status}");
                        continue;
                    }
                    match response.json::<WireResponse>() {
                        Ok(body) => return Ok(body.text),
                        Err(e) => last = format!("malformed wire body: {e}"),
                    }
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(PlanErrorKind::Transport {
            attempts,
            message: last,
        })
    }
}

impl Planner for LlmPlanner {
    fn name(&self) -> &str {
        "llm"
    }

    fn plan(&self, scene: &ScenarioState) -> Result<PlanResult, PlanError> {
        let start = Instant::now();
        let bundle = build_prompt(scene, &self.instructions, &self.features)
            .map_err(|e| self.fail(scene, e.into()))?;
        let prompt = format!("{}\n{}", bundle.instruction_text, bundle.input_text);
        let text = self.request_text(prompt).map_err(|k| self.fail(scene, k))?;
        let (chain, trajectory) = parse_response_with(&text, self.features.dt)
            .map_err(|e| self.fail(scene, PlanErrorKind::Response(e)))?;
        Ok(PlanResult {
            trajectory,
            chain: Some(chain),
            prompt_echo: Some(bundle),
            latency: start.elapsed().as_secs_f64(),
        })
    }
}
