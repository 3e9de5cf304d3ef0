#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lgp::detail {

struct HttpReply {
  int status = 0;
  std::string body;
};

// Throws RemoteError on transport failure; non-2xx statuses are returned.
HttpReply post_json(const std::string& url, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    double timeout_s);

}  // namespace lgp::detail
