#include "loadcast/error.hpp"
