// Stateful in-memory stand-in for the review service, used by the UI
// tests.  It speaks the same routes and status codes as the real thing.

import type { HttpClient, HttpResponse } from "./api.js";
import type { DecisionPayload, PairPayload, PendingEntry } from "./types.js";

const THETAS = [2.0, 4.0, 8.0];

function pairFixture(): PairPayload {
  return {
    snowy_id: "snowy_b",
    tier: 2,
    status: "needs_review",
    thetas: THETAS,
    snowy: {
      polyline: [
        [0, 0],
        [50, 0],
        [100, 0],
      ],
      frame_count: 100,
      road_users: 4,
    },
    candidates: [
      {
        clear_id: "clear_up",
        coverages: [0.0, 1.0, 1.0],
        d_max: 3.0,
        frame_count: 200,
        road_users: 6,
        polyline: [
          [-30, 3],
          [60, 3],
          [160, 3],
        ],
      },
      {
        clear_id: "clear_down",
        coverages: [0.0, 1.0, 1.0],
        d_max: 3.0,
        frame_count: 200,
        road_users: 2,
        polyline: [
          [-30, -3],
          [60, -3],
          [160, -3],
        ],
      },
    ],
    decision: null,
    available_clear_ids: ["clear_a", "clear_down", "clear_up"],
  };
}

export interface FixtureService {
  http: HttpClient;
  /** Force the next decision POST to answer 409 with this decision. */
  conflictWith(decision: DecisionPayload): void;
  requests: string[];
}

function jsonResponse(status: number, body: unknown): HttpResponse {
  return { status, json: async () => body };
}

export function fixtureService(): FixtureService {
  const pair = pairFixture();
  let pending: PendingEntry[] = [
    { snowy_id: "snowy_b", tier: 2, status: "needs_review", candidate_count: 2 },
  ];
  let forcedConflict: DecisionPayload | null = null;
  const requests: string[] = [];

  const http: HttpClient = async (url, init) => {
    const method = init?.method ?? "GET";
    requests.push(`${method} ${url}`);
    if (method === "GET" && url.endsWith("/api/state")) {
      return jsonResponse(200, {
        schema_version: 1,
        config: { thetas: THETAS },
        counts: {
          snowy: 3,
          clear: 3,
          outcomes: 3,
          pending: pending.length,
          auto_matched: 1,
          matched: 0,
          unmatched: 1,
        },
        clear_ids: ["clear_a", "clear_down", "clear_up"],
      });
    }
    if (method === "GET" && url.endsWith("/api/pending")) {
      return jsonResponse(200, { pending });
    }
    if (method === "GET" && url.endsWith("/api/pair/snowy_b")) {
      return jsonResponse(200, pair);
    }
    if (method === "POST" && url.endsWith("/api/pair/snowy_b/decision")) {
      const body = JSON.parse(init?.body ?? "{}") as { clear_id: string; note: string };
      if (forcedConflict) {
        return jsonResponse(409, { result: "conflict", decision: forcedConflict });
      }
      if (pair.decision) {
        if (pair.decision.clear_id === body.clear_id) {
          return jsonResponse(200, {
            result: "accepted",
            decision: pair.decision,
            pending: pending.length,
          });
        }
        return jsonResponse(409, { result: "conflict", decision: pair.decision });
      }
      const offered = pair.candidates.some((c) => c.clear_id === body.clear_id);
      if (!offered) {
        return jsonResponse(400, {
          result: "invalid",
          reason: `${body.clear_id} is not among the candidates`,
        });
      }
      pair.decision = {
        clear_id: body.clear_id,
        decided_by: "human",
        note: body.note,
        decided_at: "2026-03-01T09:00:00+00:00",
      };
      pair.status = "matched";
      pending = pending.filter((entry) => entry.snowy_id !== "snowy_b");
      return jsonResponse(200, {
        result: "accepted",
        decision: pair.decision,
        pending: pending.length,
      });
    }
    return jsonResponse(404, { reason: `no route for ${method} ${url}` });
  };

  return {
    http,
    conflictWith: (decision) => {
      forcedConflict = decision;
    },
    requests,
  };
}
