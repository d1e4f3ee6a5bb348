// Page wiring: session, routes, forms, polling.  All imperative code
// lives here; the modules it calls are pure or network-only.

import { Api, ApiError } from "./api.js";
import { follow, postTweet, quoteStr } from "./facts.js";
import {
  TokenKind,
  parseSearchResults,
  parseTimeline,
  renderSearchResults,
  renderTimeline,
  searchGoal,
  searchHref,
} from "./render.js";

const POLL_MS = Number(
  new URLSearchParams(location.search).get("poll") ?? "2000",
);

const api = new Api("");
let pollTimer: number | undefined;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error("missing element #" + id);
  return node as T;
}

function sessionUser(): string {
  return localStorage.getItem("tweetlog.user") ?? "";
}

function setBanner(text: string): void {
  const banner = el<HTMLElement>("banner");
  banner.textContent = text;
  banner.hidden = text === "";
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.line !== undefined
      ? err.message + " (line " + err.line + ", column " + err.column + ")"
      : err.message;
  }
  return String(err);
}

// -- pages --

async function showTimeline(): Promise<void> {
  const user = sessionUser();
  const view = el<HTMLElement>("view");
  if (!user) {
    view.innerHTML = '<p class="empty">Enter a user name to see a timeline.</p>';
    return;
  }
  const rows = await api.query("timeline(user(" + quoteStr(user) + "), T, E)");
  view.innerHTML = renderTimeline(parseTimeline(rows));
}

async function showSearch(kind: TokenKind, value: string): Promise<void> {
  const rows = await api.query(searchGoal(kind, value));
  const label = (kind === "hashtag" ? "#" : kind === "userID" ? "@" : "") + value;
  el<HTMLElement>("view").innerHTML = renderSearchResults(
    parseSearchResults(rows),
    label,
  );
}

function showAbout(): void {
  el<HTMLElement>("view").innerHTML = [
    "<h2>About</h2>",
    "<p>This client renders a timeline the server has already",
    "materialized: every tweet you see was pushed here by a rule at the",
    "moment it was posted, so loading this page is a single indexed",
    "read. Posting and following insert one fact each; everything else",
    "is derived.</p>",
  ].join("\n");
}

// -- routing --

function route(): { page: string; kind?: TokenKind; value?: string } {
  const hash = location.hash || "#/timeline";
  const m = /^#\/search\/(word|userID|hashtag)\/(.*)$/.exec(hash);
  if (m) {
    return { page: "search", kind: m[1] as TokenKind, value: decodeURIComponent(m[2]) };
  }
  if (hash === "#/mine") return { page: "mine" };
  if (hash === "#/about") return { page: "about" };
  return { page: "timeline" };
}

async function render(): Promise<void> {
  window.clearTimeout(pollTimer);
  const r = route();
  try {
    if (r.page === "about") {
      showAbout();
    } else if (r.page === "search") {
      await showSearch(r.kind!, r.value!);
    } else if (r.page === "mine") {
      const user = sessionUser();
      if (user) await showSearch("userID", user);
      else el<HTMLElement>("view").innerHTML = '<p class="empty">Log in first.</p>';
    } else {
      await showTimeline();
      pollTimer = window.setTimeout(render, POLL_MS);
    }
  } catch (err) {
    setBanner(describe(err));
  }
}

// -- forms --

function wireForms(): void {
  const tweetInput = el<HTMLInputElement>("tweet-text");
  const tweetButton = el<HTMLButtonElement>("tweet-send");
  const followInput = el<HTMLInputElement>("follow-name");
  const followButton = el<HTMLButtonElement>("follow-send");
  const loginInput = el<HTMLInputElement>("login-name");

  const sync = () => {
    const loggedIn = sessionUser() !== "";
    tweetButton.disabled = !loggedIn || tweetInput.value.trim() === "";
    followButton.disabled = !loggedIn || followInput.value.trim() === "";
    el<HTMLElement>("whoami").textContent = loggedIn
      ? "@" + sessionUser()
      : "not logged in";
  };

  loginInput.value = sessionUser();
  loginInput.addEventListener("change", () => {
    localStorage.setItem("tweetlog.user", loginInput.value.trim());
    sync();
    void render();
  });
  tweetInput.addEventListener("input", sync);
  followInput.addEventListener("input", sync);

  tweetButton.addEventListener("click", async () => {
    setBanner("");
    try {
      await postTweet(api, sessionUser(), tweetInput.value, Date.now());
      tweetInput.value = "";
      sync();
      await api.quiesce();
      await render();
    } catch (err) {
      setBanner(describe(err)); // keep the input so the text can be fixed
    }
  });

  followButton.addEventListener("click", async () => {
    setBanner("");
    try {
      await follow(api, sessionUser(), followInput.value.trim(), Date.now());
      followInput.value = "";
      sync();
      await api.quiesce();
      await render();
    } catch (err) {
      setBanner(describe(err));
    }
  });

  el<HTMLFormElement>("search-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const raw = el<HTMLInputElement>("search-text").value.trim();
    if (!raw) return;
    const kind: TokenKind = raw.startsWith("#")
      ? "hashtag"
      : raw.startsWith("@")
        ? "userID"
        : "word";
    location.hash = searchHref(kind, raw.replace(/^[#@]/, ""));
  });

  sync();
}

window.addEventListener("hashchange", () => void render());
wireForms();
void render();
