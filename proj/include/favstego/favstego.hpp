#pragma once

#include "favstego/bytes.hpp"
#include "favstego/engine.hpp"
#include "favstego/error.hpp"
#include "favstego/framing.hpp"
#include "favstego/ico.hpp"
#include "favstego/pixel_codec.hpp"
#include "favstego/sanitizer.hpp"
#include "favstego/steganalysis.hpp"
