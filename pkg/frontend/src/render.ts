// Pure view logic: timeline and search rows in, HTML strings out.
// Everything here is testable without a DOM; app.ts owns the wiring.

import { quoteStr } from "./facts.js";
import {
  TermJson,
  intOf,
  isCompound,
  listOf,
  strOf,
  termText,
  userNameOf,
} from "./terms.js";

export type TokenKind = "word" | "userID" | "hashtag";

export interface Token {
  kind: TokenKind;
  value: string;
}

export type TweetBody =
  | { kind: "tokens"; tokens: Token[] }
  | { kind: "plain"; text: string };

export type TimelineEntry =
  | { time: number; kind: "tweet"; author: string; body: TweetBody }
  | { time: number; kind: "followingYou"; user: string }
  | { time: number; kind: "other"; text: string };

export interface SearchHit {
  time: number;
  author: string;
  body: TweetBody;
}

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function parseBody(text: TermJson): TweetBody {
  if (isCompound(text, "text", 1)) {
    const inner = text.a[0];
    if (isCompound(inner, "tokenized", 1)) {
      const items = listOf(inner.a[0]);
      if (items !== null) {
        const tokens: Token[] = [];
        for (const item of items) {
          if (
            isCompound(item, "word", 1) ||
            isCompound(item, "userID", 1) ||
            isCompound(item, "hashtag", 1)
          ) {
            const v = strOf(item.a[0]);
            if (v !== null) {
              tokens.push({ kind: item.c as TokenKind, value: v });
              continue;
            }
          }
          return { kind: "plain", text: termText(text) };
        }
        return { kind: "tokens", tokens };
      }
    }
    if (isCompound(inner, "plain", 1)) {
      const v = strOf(inner.a[0]);
      if (v !== null) return { kind: "plain", text: v };
    }
  }
  return { kind: "plain", text: termText(text) };
}

/**
 * Turn timeline(user(U), T, E) query rows into entries, newest first.
 * Rows the client does not recognize still render, as raw term text.
 */
export function parseTimeline(rows: Array<Record<string, TermJson>>): TimelineEntry[] {
  const entries: TimelineEntry[] = [];
  for (const row of rows) {
    const time = row.T !== undefined ? intOf(row.T) ?? 0 : 0;
    const el = row.E;
    if (el === undefined) continue;
    if (isCompound(el, "tweet", 2)) {
      const author = userNameOf(el.a[0]);
      if (author !== null) {
        entries.push({ time, kind: "tweet", author, body: parseBody(el.a[1]) });
        continue;
      }
    }
    if (isCompound(el, "followingYou", 1)) {
      const who = userNameOf(el.a[0]);
      if (who !== null) {
        entries.push({ time, kind: "followingYou", user: who });
        continue;
      }
    }
    entries.push({ time, kind: "other", text: termText(el) });
  }
  entries.sort((a, b) => b.time - a.time);
  return entries;
}

export function parseSearchResults(
  rows: Array<Record<string, TermJson>>,
): SearchHit[] {
  const hits: SearchHit[] = [];
  for (const row of rows) {
    const time = row.T !== undefined ? intOf(row.T) ?? 0 : 0;
    const author = row.U !== undefined ? userNameOf(row.U) : null;
    if (author === null || row.W === undefined) continue;
    hits.push({ time, author, body: parseBody(row.W) });
  }
  hits.sort((a, b) => b.time - a.time);
  return hits;
}

/** The query a search link runs when followed. */
export function searchGoal(kind: "userID" | "hashtag" | "word", value: string): string {
  return "searchIndex(" + kind + "(" + quoteStr(value) + "), T, U, W)";
}

export function searchHref(kind: "userID" | "hashtag" | "word", value: string): string {
  return "#/search/" + kind + "/" + encodeURIComponent(value);
}

function userLink(name: string): string {
  return (
    '<a class="tok user" href="' +
    searchHref("userID", name) +
    '">@' +
    escapeHtml(name) +
    "</a>"
  );
}

export function tokenHtml(token: Token): string {
  if (token.kind === "userID") return userLink(token.value);
  if (token.kind === "hashtag") {
    return (
      '<a class="tok tag" href="' +
      searchHref("hashtag", token.value) +
      '">#' +
      escapeHtml(token.value) +
      "</a>"
    );
  }
  return "<span>" + escapeHtml(token.value) + "</span>";
}

export function bodyHtml(body: TweetBody): string {
  if (body.kind === "tokens") return body.tokens.map(tokenHtml).join(" ");
  return "<span>" + escapeHtml(body.text) + "</span>";
}

function card(time: number, inner: string, cls: string): string {
  return (
    '<article class="card ' + cls + '">' +
    inner +
    '<time datetime="' + time + '">' + new Date(time).toLocaleString() + "</time>" +
    "</article>"
  );
}

export function entryHtml(entry: TimelineEntry): string {
  if (entry.kind === "tweet") {
    return card(
      entry.time,
      "<header>" + userLink(entry.author) + "</header><p>" +
        bodyHtml(entry.body) + "</p>",
      "tweet",
    );
  }
  if (entry.kind === "followingYou") {
    return card(
      entry.time,
      "<p>" + userLink(entry.user) + " is following you</p>",
      "notice",
    );
  }
  return card(entry.time, "<p>" + escapeHtml(entry.text) + "</p>", "other");
}

export function renderTimeline(entries: TimelineEntry[]): string {
  if (entries.length === 0) {
    return '<p class="empty">Nothing here yet. Follow someone or post a tweet.</p>';
  }
  return entries.map(entryHtml).join("\n");
}

export function renderSearchResults(hits: SearchHit[], label: string): string {
  const head = "<h2>Results for " + escapeHtml(label) + "</h2>";
  if (hits.length === 0) return head + '<p class="empty">No tweets found.</p>';
  return (
    head +
    hits
      .map((h) =>
        card(
          h.time,
          "<header>" + userLink(h.author) + "</header><p>" +
            bodyHtml(h.body) + "</p>",
          "tweet",
        ),
      )
      .join("\n")
  );
}
