// Source snippets shared by the unit and acceptance suites.
#pragma once

#include "typegate/typecheck.hpp"

#include <string>
#include <vector>

namespace fixtures {

inline const char* const kTakeLastBuggy =
    "def take_last_assignment(source):\n"
    "    first=True\n"
    "    last=None\n"
    "    for assn in source:\n"
    "        if first:\n"
    "            last=assn\n"
    "            first=False\n"
    "        if (assn[1]!=first[1]):\n"
    "            (yield last)\n"
    "        last=assn\n"
    "    if (last is not None):\n"
    "        (yield last)\n";

inline const char* const kTakeLastCorrect =
    "def take_last_assignment(source):\n"
    "    first=True\n"
    "    last=None\n"
    "    for assn in source:\n"
    "        if first:\n"
    "            last=assn\n"
    "            first=False\n"
    "        if (assn[1]!=last[1]):\n"
    "            (yield last)\n"
    "        last=assn\n"
    "    if (last is not None):\n"
    "        (yield last)\n";

struct CategorySnippet {
  const char* name;
  const char* source;
  typegate::Category category;
  int line;
  bool annotations;
};

// One snippet per category, each producing exactly one diagnostic.
inline std::vector<CategorySnippet> category_snippets() {
  using typegate::Category;
  return {
      {"name-error in parallel branch",
       "def pick(flag):\n"
       "    if flag:\n"
       "        y = 1\n"
       "    else:\n"
       "        return y\n"
       "    return 0\n",
       Category::NameError, 5, false},
      {"attribute-error on int",
       "def grow():\n"
       "    n = 1\n"
       "    n.append(2)\n"
       "    return n\n",
       Category::AttributeError, 3, false},
      {"unsupported-operand in misuse", kTakeLastBuggy, Category::UnsupportedOperand, 8, false},
      {"unsupported-operand str plus int",
       "def concat():\n"
       "    s = 'a'\n"
       "    t = 1 + s\n"
       "    return t\n",
       Category::UnsupportedOperand, 3, false},
      {"wrong-arg-types len of int",
       "def size():\n"
       "    n = 5\n"
       "    return len(n)\n",
       Category::WrongArgTypes, 3, false},
      {"not-writable tuple item",
       "def patch():\n"
       "    x = (1, 2)\n"
       "    x[0] = 3\n"
       "    return x\n",
       Category::NotWritable, 3, false},
      {"bad-return-type with annotations",
       "def f() -> int:\n"
       "    return 'a'\n",
       Category::BadReturnType, 2, true},
      {"import-error on star import",
       "from helpers import *\n"
       "def run(x):\n"
       "    return x\n",
       Category::ImportError, 1, false},
  };
}

// Well-typed functions: no diagnostics in either mode.
inline std::vector<std::string> clean_snippets() {
  return {
      kTakeLastCorrect,
      "def add(a, b):\n"
      "    total = a + b\n"
      "    return total\n",
      "def count_words(text):\n"
      "    counts = {}\n"
      "    for word in text.split():\n"
      "        counts[word] = counts.get(word, 0) + 1\n"
      "    return counts\n",
      "def mean(values):\n"
      "    if not values:\n"
      "        return 0.0\n"
      "    total = 0\n"
      "    for v in values:\n"
      "        total += v\n"
      "    return total / len(values)\n",
      "import os\n"
      "def join_all(parts, sep='/'):\n"
      "    path = ''\n"
      "    for p in parts:\n"
      "        path = os.path.join(path, p)\n"
      "    return path.strip(sep)\n",
      "def squares(n: int) -> list:\n"
      "    out = []\n"
      "    for i in range(n):\n"
      "        out.append(i * i)\n"
      "    return out\n",
      "def first_even(items):\n"
      "    found = None\n"
      "    for item in items:\n"
      "        if item % 2 == 0:\n"
      "            found = item\n"
      "            break\n"
      "    return found\n",
      "def swap(pair):\n"
      "    a, b = pair\n"
      "    return b, a\n",
      "def title_case(name: str) -> str:\n"
      "    words = name.split(' ')\n"
      "    result = []\n"
      "    for w in words:\n"
      "        result.append(w.capitalize())\n"
      "    return ' '.join(result)\n",
      "def retry(fn, attempts=3):\n"
      "    last_error = None\n"
      "    while attempts > 0:\n"
      "        attempts -= 1\n"
      "        result = fn()\n"
      "        if result is not None:\n"
      "            return result\n"
      "        last_error = 'failed'\n"
      "    raise RuntimeError(last_error)\n",
      "def flatten(rows):\n"
      "    flat = []\n"
      "    for row in rows:\n"
      "        flat.extend(row)\n"
      "    del rows\n"
      "    return flat\n",
      "def describe(x: float) -> str:\n"
      "    label = 'small'\n"
      "    if x > 10:\n"
      "        label = 'large'\n"
      "    return label + ':' + str(x)\n",
      "def collect(lines):\n"
      "    seen = set()\n"
      "    while True:\n"
      "        line = lines.pop()\n"
      "        if not line:\n"
      "            break\n"
      "        seen.add(line)\n"
      "    return sorted(seen)\n",
  };
}

}  // namespace fixtures
