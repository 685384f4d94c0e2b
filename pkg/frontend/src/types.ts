// Payload shapes of the /v1 API.

export interface CatalogAttribute {
  id: number;
  name: string;
  model: string;
  entity: string;
  kind: string;
}

export interface CatalogDoc {
  attributes: CatalogAttribute[];
}

export interface EpisodeEvent {
  episode: number;
  final_cost: number;
  final_storage: number;
  best_cost: number;
  best_storage: number;
  baseline_time: number | null;
  baseline_space: number | null;
}

export interface SchemaRow {
  signature: string;
  cost: number;
  storage: number;
  first_episode: number;
}

export interface RunStatus {
  phase: "IDLE" | "LOADED" | "RUNNING" | "STOPPED" | "DONE";
  episode_done: number;
  episodes_total: number;
  best: SchemaRow | null;
  run: string | null;
  error: string | null;
}

export interface WhatifOutcome {
  realizable: boolean;
  signature?: string;
  cost?: number;
  storage?: number;
  violation?: [number, number];
  detail?: string;
}

export type SortKey = "time" | "space";
