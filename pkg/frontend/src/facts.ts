// The only two axiom shapes this client ever creates.  Each form is a
// pattern with named holes; submission instantiates the pattern with
// the session user, the form input, and the client clock, and sends
// exactly one insert.

import { Api } from "./api.js";

export interface FactForm {
  pattern: string;
  holes: Record<string, "str" | "int">;
}

export const TWEET_FORM: FactForm = {
  pattern: "tweeted(user({user}), {time}, text(plain({text})))",
  holes: { user: "str", time: "int", text: "str" },
};

export const FOLLOW_FORM: FactForm = {
  pattern: "follows(user({user}), user({other}), {time})",
  holes: { user: "str", other: "str", time: "int" },
};

/** Quote a string literal the way the server's parser reads it back. */
export function quoteStr(s: string): string {
  return (
    '"' +
    s
      .replace(/\\/g, "\\\\")
      .replace(/"/g, '\\"')
      .replace(/\n/g, "\\n")
      .replace(/\t/g, "\\t") +
    '"'
  );
}

export function instantiate(
  form: FactForm,
  values: Record<string, string | number>,
): string {
  return form.pattern.replace(/\{(\w+)\}/g, (_, hole: string) => {
    const kind = form.holes[hole];
    const v = values[hole];
    if (kind === undefined || v === undefined) {
      throw new Error("unbound hole {" + hole + "}");
    }
    if (kind === "int") {
      if (typeof v !== "number" || !Number.isSafeInteger(v)) {
        throw new Error("hole {" + hole + "} needs an integer, got " + v);
      }
      return String(v);
    }
    return quoteStr(String(v));
  });
}

export function tweetedAxiom(user: string, nowMs: number, text: string): string {
  return instantiate(TWEET_FORM, { user, time: nowMs, text });
}

export function followsAxiom(user: string, other: string, nowMs: number): string {
  return instantiate(FOLLOW_FORM, { user, other, time: nowMs });
}

export async function postTweet(
  api: Api,
  user: string,
  text: string,
  nowMs: number,
): Promise<void> {
  await api.insert(tweetedAxiom(user, nowMs, text));
}

export async function follow(
  api: Api,
  user: string,
  other: string,
  nowMs: number,
): Promise<void> {
  await api.insert(followsAxiom(user, other, nowMs));
}
