/**
 * Reward scoring and group-advantage bindings for RL training loops.
 *
 * Mirrors the spatialqa pipeline's scoring semantics operation for
 * operation and float for float: sequential sums, the same strict
 * threshold comparisons, and the same response-parsing regexes, so
 * results are bit-identical to the pipeline for identical inputs.
 * Configuration uses the same JSON schema as the pipeline's --config
 * document (the `reward` and `grpo` sections).
 */

import { readFileSync } from "node:fs";

export type AnswerKind = "numeric" | "choice";

export interface RewardConfig {
  thresholds: number[];
  coldstart_lambda: number;
}

export interface GrpoConfig {
  group_size: number;
  clip_eps: number;
  kl_beta: number;
  std_floor: number;
}

export interface ScoreBreakdown {
  format: number;
  accuracy: number;
  total: number;
}

export const DEFAULT_THRESHOLDS = [
  0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95,
];

const DEFAULT_REWARD: RewardConfig = {
  thresholds: DEFAULT_THRESHOLDS,
  coldstart_lambda: 0.5,
};

const DEFAULT_GRPO: GrpoConfig = {
  group_size: 8,
  clip_eps: 0.2,
  kl_beta: 0.01,
  std_floor: 1e-8,
};

function namedError(name: string, message: string): Error {
  const err = new Error(message);
  err.name = name;
  return err;
}

// --- response parsing (regexes mirror the pipeline exactly) ---------------

const FORMAT_RE = /^\s*<think>([\s\S]*?)<\/think>\s*<answer>([\s\S]*?)<\/answer>\s*$/;
const ANSWER_BLOCK_RE = /<answer>([\s\S]*?)<\/answer>/;
const NUMBER_RE = /[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?/g;
const LETTER_RE = /\b([A-D])\b/g;
const EDGE_PUNCT = ".,:;!?()[]{}'\"`";

function countOccurrences(text: string, token: string): number {
  let count = 0;
  let index = text.indexOf(token);
  while (index !== -1) {
    count += 1;
    index = text.indexOf(token, index + token.length);
  }
  return count;
}

function lastMatch(text: string, re: RegExp): string | null {
  const matches = text.match(re);
  return matches === null ? null : matches[matches.length - 1];
}

/** True when the response is exactly one think block then one answer block. */
export function formatOk(raw: string): boolean {
  return (
    FORMAT_RE.test(raw) &&
    countOccurrences(raw, "<think>") === 1 &&
    countOccurrences(raw, "</think>") === 1 &&
    countOccurrences(raw, "<answer>") === 1 &&
    countOccurrences(raw, "</answer>") === 1
  );
}

function stripEdge(text: string, chars: string): string {
  let start = 0;
  let end = text.length;
  while (start < end && chars.includes(text[start])) start += 1;
  while (end > start && chars.includes(text[end - 1])) end -= 1;
  return text.slice(start, end);
}

function normalizeChoice(pred: string): string {
  return stripEdge(pred.trim(), EDGE_PUNCT).trim().toUpperCase();
}

function answerCandidate(raw: string, kind: AnswerKind): string | null {
  if (
    countOccurrences(raw, "<answer>") === 1 &&
    countOccurrences(raw, "</answer>") === 1
  ) {
    const match = raw.match(ANSWER_BLOCK_RE);
    if (match !== null) return match[1].trim();
  }
  if (kind === "numeric") return lastMatch(raw, NUMBER_RE);
  const letters = raw.toUpperCase().match(LETTER_RE);
  return letters === null ? null : letters[letters.length - 1];
}

// --- reward math ----------------------------------------------------------

export function mcqReward(pred: string, gold: string): number {
  return normalizeChoice(pred) === gold.trim().toUpperCase() ? 1 : 0;
}

export function numericalReward(
  pred: number,
  gold: number,
  config: RewardConfig = DEFAULT_REWARD,
): number {
  if (gold === 0) return pred === 0 ? 1 : 0;
  const relErr = Math.abs(pred - gold) / Math.abs(gold);
  let hits = 0;
  for (const tau of config.thresholds) {
    if (relErr < tau) hits += 1;
  }
  return hits / config.thresholds.length;
}

function scoreWithConfig(
  raw: string,
  kind: AnswerKind,
  gold: number | string,
  config: RewardConfig,
): ScoreBreakdown {
  if (kind !== "numeric" && kind !== "choice") {
    throw namedError("ValueError", `unsupported answer kind for scoring: ${kind}`);
  }
  const format = formatOk(raw) ? 1 : 0;
  const text = answerCandidate(raw, kind);
  let accuracy = 0;
  if (text !== null) {
    if (kind === "choice") {
      accuracy = mcqReward(text, String(gold));
    } else {
      const inner = lastMatch(text, NUMBER_RE);
      if (inner !== null) {
        accuracy = numericalReward(parseFloat(inner), Number(gold), config);
      }
    }
  }
  return { format, accuracy, total: format + accuracy };
}

function advantagesWithConfig(rewards: number[], config: GrpoConfig): number[] {
  const n = rewards.length;
  if (n < 2) {
    throw namedError("GroupTooSmall", `need at least 2 rewards, got ${n}`);
  }
  for (const value of rewards) {
    if (!Number.isFinite(value)) {
      throw namedError("ValueError", "rewards contains a non-finite value");
    }
  }
  let total = 0;
  for (const value of rewards) total += value;
  const mean = total / n;
  let sq = 0;
  for (const value of rewards) {
    const d = value - mean;
    sq += d * d;
  }
  const std = Math.sqrt(sq / n);
  if (std <= config.std_floor) return rewards.map(() => 0);
  return rewards.map((value) => (value - mean) / std);
}

// --- configuration handle ----------------------------------------------------

export interface HandleConfigDocument {
  reward?: Partial<RewardConfig>;
  grpo?: Partial<GrpoConfig>;
  synth?: Record<string, unknown>; // accepted for schema parity, unused here
}

function validateReward(config: RewardConfig): void {
  if (config.thresholds.length === 0) {
    throw namedError("ConfigError", "thresholds must be nonempty");
  }
  let prev = 0;
  for (const tau of config.thresholds) {
    if (!(tau > 0 && tau < 1)) {
      throw namedError("ConfigError", `threshold ${tau} outside (0, 1)`);
    }
    if (tau <= prev) {
      throw namedError("ConfigError", "thresholds must be strictly increasing");
    }
    prev = tau;
  }
  if (!(config.coldstart_lambda >= 0 && config.coldstart_lambda <= 1)) {
    throw namedError("ConfigError", "coldstart_lambda must be a fraction in [0, 1]");
  }
}

const REWARD_KEYS = new Set(["thresholds", "coldstart_lambda"]);
const GRPO_KEYS = new Set(["group_size", "clip_eps", "kl_beta", "std_floor"]);
const SECTION_KEYS = new Set(["reward", "grpo", "synth"]);

/**
 * Immutable snapshot of reward and advantage configuration. Safe to share
 * across concurrent calls; construct once per training run.
 */
export class BindingHandle {
  readonly reward: RewardConfig;
  readonly grpo: GrpoConfig;

  constructor(config: string | HandleConfigDocument | null = null) {
    let doc: HandleConfigDocument = {};
    if (typeof config === "string") {
      doc = JSON.parse(readFileSync(config, "utf-8")) as HandleConfigDocument;
    } else if (config !== null) {
      doc = config;
    }
    for (const key of Object.keys(doc)) {
      if (!SECTION_KEYS.has(key)) {
        throw namedError("ConfigError", `unknown config section '${key}'`);
      }
    }
    for (const key of Object.keys(doc.reward ?? {})) {
      if (!REWARD_KEYS.has(key)) {
        throw namedError("ConfigError", `unknown keys in section 'reward': ${key}`);
      }
    }
    for (const key of Object.keys(doc.grpo ?? {})) {
      if (!GRPO_KEYS.has(key)) {
        throw namedError("ConfigError", `unknown keys in section 'grpo': ${key}`);
      }
    }
    this.reward = Object.freeze({
      thresholds: [...(doc.reward?.thresholds ?? DEFAULT_REWARD.thresholds)],
      coldstart_lambda: doc.reward?.coldstart_lambda ?? DEFAULT_REWARD.coldstart_lambda,
    });
    this.grpo = Object.freeze({ ...DEFAULT_GRPO, ...(doc.grpo ?? {}) });
    validateReward(this.reward);
    if (this.grpo.group_size < 2) {
      throw namedError("ConfigError", "group_size must be at least 2");
    }
    Object.freeze(this);
  }

  /** Format, accuracy and combined reward for one raw response. */
  score(raw: string, kind: AnswerKind, gold: number | string): ScoreBreakdown {
    return scoreWithConfig(raw, kind, gold, this.reward);
  }

  /** Group-normalized advantages (zero mean, unit population std). */
  advantages(rewards: number[]): number[] {
    return advantagesWithConfig(rewards, this.grpo);
  }
}

const DEFAULT_HANDLE = new BindingHandle();

/** score() against the default configuration. */
export function score(
  raw: string,
  kind: AnswerKind,
  gold: number | string,
): ScoreBreakdown {
  return DEFAULT_HANDLE.score(raw, kind, gold);
}

/** advantages() against the default configuration. */
export function advantages(rewards: number[]): number[] {
  return DEFAULT_HANDLE.advantages(rewards);
}
