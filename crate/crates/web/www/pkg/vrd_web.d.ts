/* tslint:disable */
/* eslint-disable */

/**
 * `[re₀, im₀, …, re₃, im₃, k, sign, fidelity]` with (k, sign) the closest ψ±ᵏ.
 */
export function prepareQuquart(a1: number, a2: number, a3: number, a4: number): Float64Array;

/**
 * `[mean, stderr, exact, cost]`
 */
export function sampledFidelity(xi: number, shots: number, seed: number): Float64Array;

/**
 * `[input fidelity, signed negativity, cost, γ₊, γ₋, teleport before, teleport after, CRB noisy, CRB distilled]`
 */
export function wernerSummary(xi: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly prepareQuquart: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sampledFidelity: (a: number, b: number, c: number) => [number, number, number, number];
    readonly wernerSummary: (a: number) => [number, number, number, number];
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
