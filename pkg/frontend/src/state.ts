/**
 * Playground state and its pure transitions.
 *
 * The state is the single source of truth for what gets submitted; the DOM
 * layer only reads and writes through these helpers, so the steering loop
 * (append a recommended invocation, resubmit) is testable without a browser.
 */

import type { RecommendRequest, RecommendResponse } from "./api.js";

export interface DeclarationDraft {
  name: string;
  invocations: string[];
}

export interface Params {
  k: number;
  M: number;
  N: number;
  snippetCount: number;
}

export interface PlaygroundState {
  context: DeclarationDraft[];
  active: DeclarationDraft;
  params: Params;
  lastResponse: RecommendResponse | null;
  inFlight: boolean;
  error: string | null;
}

export const PARAM_LIMITS: Record<keyof Params, { min: number; max: number }> = {
  k: { min: 1, max: 100 },
  M: { min: 1, max: 1000 },
  N: { min: 1, max: 200 },
  snippetCount: { min: 1, max: 50 },
};

export function initialState(): PlaygroundState {
  return {
    context: [],
    active: { name: "myMethod()", invocations: [] },
    params: { k: 4, M: 25, N: 20, snippetCount: 5 },
    lastResponse: null,
    inFlight: false,
    error: null,
  };
}

/** Inline validation before anything is sent; null means submittable. */
export function validate(state: PlaygroundState): string | null {
  if (!state.active.name.trim()) {
    return "the active declaration needs a name";
  }
  const names = state.context.map((d) => d.name.trim());
  if (names.some((n) => !n)) {
    return "every context declaration needs a name";
  }
  if (new Set(names).size !== names.length) {
    return "context declaration names must be unique";
  }
  if (names.includes(state.active.name.trim())) {
    return "the active declaration name collides with a context declaration";
  }
  for (const [key, limit] of Object.entries(PARAM_LIMITS)) {
    const value = state.params[key as keyof Params];
    if (!Number.isInteger(value) || value < limit.min || value > limit.max) {
      return `${key} must be an integer in [${limit.min}, ${limit.max}]`;
    }
  }
  return null;
}

export function toRequest(state: PlaygroundState): RecommendRequest {
  return {
    context_declarations: state.context.map((d) => ({
      name: d.name.trim(),
      invocations: d.invocations.filter((s) => s.trim().length > 0),
    })),
    active: {
      name: state.active.name.trim(),
      invocations: state.active.invocations.filter((s) => s.trim().length > 0),
    },
    k: state.params.k,
    M: state.params.M,
    N: state.params.N,
    snippet_count: state.params.snippetCount,
  };
}

/** The steering loop's core transition: grow the active declaration. */
export function appendInvocation(state: PlaygroundState, invocation: string): PlaygroundState {
  return {
    ...state,
    active: {
      ...state.active,
      invocations: [...state.active.invocations, invocation],
    },
  };
}

export function setParam(state: PlaygroundState, key: keyof Params, value: number): PlaygroundState {
  return { ...state, params: { ...state.params, [key]: value } };
}

/** Parse one invocation per non-empty line of a textarea. */
export function parseInvocationLines(text: string): string[] {
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
}
