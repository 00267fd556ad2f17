#pragma once

// Stopword lists: plain text, one lowercase term per line, `#` comments.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "bowaudit/error.hpp"

namespace bowaudit {

struct StopwordList {
  std::set<std::string> terms;
  std::string source;   // e.g. "builtin:en" or a file path
  std::string version;

  bool contains(std::string_view t) const { return terms.find(std::string(t)) != terms.end(); }
  std::size_t size() const { return terms.size(); }
  std::string id() const { return source + "@" + version; }
};

inline StopwordList parse_stopwords(std::istream& in, std::string source) {
  StopwordList list;
  list.source = std::move(source);
  list.version = "unversioned";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.starts_with("#")) {
      constexpr std::string_view kTag = "version ";
      if (const auto pos = line.find(kTag); pos != std::string::npos && list.version == "unversioned") {
        list.version = line.substr(pos + kTag.size());
      }
      continue;
    }
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::string term = line.substr(b, line.find_last_not_of(" \t") - b + 1);
    if (std::any_of(term.begin(), term.end(), [](unsigned char c) { return std::isupper(c); })) {
      throw DataError(list.source + ":" + std::to_string(lineno) + ": stopword '" + term +
                      "' is not lowercase");
    }
    list.terms.insert(std::move(term));
  }
  if (list.terms.empty()) throw DataError(list.source + ": stopword list is empty");
  return list;
}

inline StopwordList load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open stopword list");
  return parse_stopwords(in, path);
}

namespace detail {
// Same content as data/stopwords_en.txt.
inline constexpr std::string_view kEnglishStopwords = R"(
# English stopword list, version 1.0
# The 174-term list shipped with common R text-mining toolkits
# (Snowball English stop list with contractions). One lowercase term per line.
i
me
my
myself
we
our
ours
ourselves
you
your
yours
yourself
yourselves
he
him
his
himself
she
her
hers
herself
it
its
itself
they
them
their
theirs
themselves
what
which
who
whom
this
that
these
those
am
is
are
was
were
be
been
being
have
has
had
having
do
does
did
doing
would
should
could
ought
i'm
you're
he's
she's
it's
we're
they're
i've
you've
we've
they've
i'd
you'd
he'd
she'd
we'd
they'd
i'll
you'll
he'll
she'll
we'll
they'll
isn't
aren't
wasn't
weren't
hasn't
haven't
hadn't
doesn't
don't
didn't
won't
wouldn't
shan't
shouldn't
can't
cannot
couldn't
mustn't
let's
that's
who's
what's
here's
there's
when's
where's
why's
how's
a
an
the
and
but
if
or
because
as
until
while
of
at
by
for
with
about
against
between
into
through
during
before
after
above
below
to
from
up
down
in
out
on
off
over
under
again
further
then
once
here
there
when
where
why
how
all
any
both
each
few
more
most
other
some
such
no
nor
not
only
own
same
so
than
too
very
)";
}  // namespace detail

inline const StopwordList& default_stopwords() {
  static const StopwordList list = [] {
    std::istringstream in{std::string(detail::kEnglishStopwords)};
    return parse_stopwords(in, "builtin:en");
  }();
  return list;
}

}  // namespace bowaudit
