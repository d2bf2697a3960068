"""Walk through the text-normalization pipeline step by step.

Run: python demos/01_text_pipeline.py
"""

from bugloc.preprocess import (PreprocessConfig, preprocess, split_identifier,
                               stem, strip_code_noise)

JAVA = '''\
package app.http;

/* Connection pool with retry support. */
public class RetryingConnectionPool {
    private int maxRetries = 3;

    // reconnects with exponential backoff
    public void reopenConnection() {
        String banner = "connection restored";
        this.maxRetries += 1;
    }
}
'''

BUG_REPORT = ("Stop the running job when ReopenConnection keeps failing: "
              "the RetryingConnectionPool never gives up and the UI freezes.")


def main():
    print("raw source:")
    print(JAVA)

    print("after comment/literal stripping:")
    print(strip_code_noise(JAVA))

    print("identifier splitting keeps the compound next to its parts:")
    for ident in ("RetryingConnectionPool", "reopenConnection", "maxRetries", "MAX_VALUE"):
        print(f"  {ident:28s} -> {split_identifier(ident)}")

    print("\nstemming examples:")
    for word in ("connection", "retrying", "failing", "freezes"):
        print(f"  {word:12s} -> {stem(word)}")

    config = PreprocessConfig()
    print("\nfull pipeline over the source file:")
    print(" ", preprocess(JAVA, "source_file", config).tokens)
    print("\nfull pipeline over the bug report:")
    print(" ", preprocess(BUG_REPORT, "bug_report", config).tokens)
    print("\nNote how both sides land in the same token space: that overlap "
          "is what the ranking scores measure.")


if __name__ == "__main__":
    main()
