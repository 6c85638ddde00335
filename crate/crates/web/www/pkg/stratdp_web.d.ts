/* tslint:disable */
/* eslint-disable */

/**
 * `steps` rows of `[alpha, expected, equal_split_max, sparse_ref]` for α on a
 * log grid over `[alpha_lo, alpha_hi]`. `sparse_ref` is NaN when n ≤ k.
 */
export function bound_curves(n: number, k: number, alpha_lo: number, alpha_hi: number, steps: number): Float64Array;

/**
 * `count` draws from D(α, 3), flattened as `[g1, g2, g3, g1, g2, g3, ...]`.
 */
export function dirichlet_draws(alpha: number, count: number, seed: number): Float64Array;

/**
 * Averages over `trials` mixtures of size n with k Dirichlet(α)-sized groups.
 *
 * Layout: `[strat_error, pooled_error, strat_parity, pooled_parity]` (means over
 * trials), followed by k rows `[size, true_mean, strat_estimate]` and one
 * final `[pooled_estimate]` taken from the last trial.
 */
export function stratification_demo(n: number, k: number, alpha: number, epsilon: number, trials: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bound_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly dirichlet_draws: (a: number, b: number, c: number) => [number, number, number, number];
    readonly stratification_demo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
