/** JSON contracts of the pipeline HTTP API. */

export interface JobSummary {
  job_id: string;
  stage: string | null;
  created: string;
  error: { stage: string; message: string } | null;
}

export interface TopicMapNode {
  id: string;
  label: string;
  cluster: number;
  min_npmi: number;
  newly_detected: boolean;
}

export interface TopicMapEdge {
  source: string;
  target: string;
  weight: number;
}

export interface TopicMap {
  nodes: TopicMapNode[];
  edges: TopicMapEdge[];
  stats: {
    node_count: number;
    edge_count: number;
    cluster_count: number;
    [key: string]: number;
  };
  converged: boolean;
  iterations: number;
}

export interface ClusterInfo {
  cluster: number;
  size: number;
  members: { id: string; label: string }[];
}

export interface DocumentRow {
  id: string;
  genre: string;
  title: string;
  date: string;
  abstract?: string;
  matched_terms: string[];
  relevance?: number;
}

export interface SelectionEntry {
  doc_id: string;
  provenance: string;
  timestamp: string;
}

export interface ReviewTriple {
  triple_id: string;
  head: string;
  relation: string;
  tail: string;
  head_class: string;
  tail_class: string;
  doc_id: string;
  chunk: number;
  status: string;
  reason: string;
  snippet: string;
}

export interface KgNode {
  id: string;
  label: string;
}

export interface KgEdge {
  source: string;
  target: string;
  label: string;
}

export interface KgView {
  nodes: KgNode[];
  edges: KgEdge[];
}

export interface KgStats {
  axiom_count: number;
  class_count: number;
  object_property_count: number;
}

export const STAGES = [
  "ingested",
  "keyphrases_done",
  "network_built",
  "selected",
  "extracted",
  "validated",
  "exported",
] as const;

export type Stage = (typeof STAGES)[number];
